// ncs: generate instances, build scheduling and control logics, verify and
// export them.
//
//   ncs gen --benchmark --seed 7 -o inst.json
//   ncs solve inst.json --method auto -o report.json
//   ncs verify report.json
//   ncs plots report.json --out plots/
//
// Exit codes: 0 verified, 2 no solution found / not verified, 3 input error.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ncs/ncs.hpp"

namespace {

constexpr int kExitNoSolution = 2;
constexpr int kExitInputError = 3;

std::vector<int> parse_dims(const std::vector<std::string>& tokens) {
  std::vector<int> dims;
  for (const auto& tok : tokens) {
    const auto x = tok.find('x');
    try {
      if (x == std::string::npos) {
        dims.push_back(std::stoi(tok));
      } else {
        const int count = std::stoi(tok.substr(0, x));
        const int d = std::stoi(tok.substr(x + 1));
        if (count < 0) throw ncs::Error(ncs::ErrorCode::InvalidArgument, "negative repeat count");
        dims.insert(dims.end(), static_cast<std::size_t>(count), d);
      }
    } catch (const std::logic_error&) {
      throw ncs::Error(ncs::ErrorCode::InvalidArgument, "bad --dims token '" + tok + "'");
    }
  }
  return dims;
}

void print_summary(const ncs::SolveReport& r) {
  std::cout << "method:   " << r.method << "\n"
            << "verified: " << (r.verified ? "true" : "false") << "\n";
  if (r.verified) {
    double worst = 0.0;
    for (double v : r.residuals) worst = std::max(worst, v);
    std::size_t empty = 0;
    for (const auto& s : r.schedule.slots) empty += s.empty() ? 1 : 0;
    std::cout << "max occupancy: " << r.max_occupancy << " (capacity " << r.instance.capacity << ")\n"
              << "empty slots:   " << empty << "\n"
              << "worst terminal residual: " << worst << "\n";
  }
  for (const auto& g : r.rungs) {
    std::cout << "  [" << g.outcome << "] " << g.method << (g.detail.empty() ? "" : ": " + g.detail) << "\n";
  }
  for (const auto& w : r.warnings) std::cout << "warning: " << w << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Co-design of channel schedules and deadbeat inputs for plants sharing a channel"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random Schur-unstable, reachable instance");
  int gen_n = 0, gen_m = 0, gen_t = 0;
  std::vector<std::string> gen_dims;
  double gen_range = 2.0;
  std::uint64_t gen_seed = 1;
  bool gen_benchmark = false;
  std::string gen_out;
  gen->add_option("--N", gen_n, "number of plants");
  gen->add_option("--M", gen_m, "channel capacity");
  gen->add_option("--T", gen_t, "horizon");
  gen->add_option("--dims", gen_dims, "state dimensions, e.g. 2,3 or 50x2,50x3")->delimiter(',');
  gen->add_option("--range", gen_range, "entries of A and b are uniform in [-range, range]")->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_flag("--benchmark", gen_benchmark, "N=100, M=10, T=50, 50 plants of dimension 2 then 50 of dimension 3");
  gen->add_option("-o,--out", gen_out, "output instance file")->required();

  // solve
  auto* slv = app.add_subcommand("solve", "construct and verify a scheduling and control logic");
  std::string slv_in, slv_out;
  std::string slv_method = "auto";
  bool slv_exhaustive = false, slv_timings = false;
  ncs::SimOptions slv_sim;
  slv->add_option("instance", slv_in, "instance file")->required();
  slv->add_option("--method", slv_method, "auto|lane|block|relax|brute")
      ->check(CLI::IsMember({"auto", "lane", "block", "relax", "brute"}))
      ->capture_default_str();
  slv->add_option("-o,--out", slv_out, "report file");
  slv->add_flag("--exhaustive-plans", slv_exhaustive, "exhaustive plan search (at most 10 closed-loop plants)");
  slv->add_flag("--timings", slv_timings, "record wall-clock timings in the report");
  slv->add_option("--tol", slv_sim.terminal_tolerance, "relative terminal residual bound")->capture_default_str();
  slv->add_option("--zero-tol", slv_sim.zero_threshold, "relative zero threshold")->capture_default_str();

  // verify
  auto* ver = app.add_subcommand("verify", "re-simulate a report's control matrix");
  std::string ver_in;
  ncs::SimOptions ver_sim;
  ver->add_option("report", ver_in, "report file")->required();
  ver->add_option("--tol", ver_sim.terminal_tolerance, "relative terminal residual bound")->capture_default_str();
  ver->add_option("--zero-tol", ver_sim.zero_threshold, "relative zero threshold")->capture_default_str();

  // plots
  auto* plt = app.add_subcommand("plots", "export control, schedule and trajectory CSV files");
  std::string plt_in, plt_out = ".";
  plt->add_option("report", plt_in, "report file")->required();
  plt->add_option("--out", plt_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInputError;
  }

  try {
    if (*gen) {
      std::vector<int> dims;
      if (gen_benchmark) {
        gen_n = 100;
        gen_m = 10;
        gen_t = 50;
        dims = ncs::benchmark_dims();
      } else {
        dims = parse_dims(gen_dims);
        if (dims.size() == 1 && gen_n > 1) dims.assign(static_cast<std::size_t>(gen_n), dims.front());
      }
      const auto g = ncs::generate_instance(static_cast<std::size_t>(std::max(gen_n, 0)), gen_m, gen_t, dims,
                                            gen_range, gen_seed);
      ncs::write_instance(gen_out, ncs::to_file(g, "ncs gen seed=" + std::to_string(gen_seed)));
      std::cout << "wrote " << gen_out << " (N=" << gen_n << ", M=" << gen_m << ", T=" << gen_t << ")\n";
      return 0;
    }
    if (*slv) {
      static const std::map<std::string, ncs::Method> methods{{"auto", ncs::Method::Auto},
                                                              {"lane", ncs::Method::Lane},
                                                              {"block", ncs::Method::Block},
                                                              {"relax", ncs::Method::Relax},
                                                              {"brute", ncs::Method::Brute}};
      ncs::SolveOptions opts;
      opts.method = methods.at(slv_method);
      opts.exhaustive_plans = slv_exhaustive;
      opts.timings = slv_timings;
      opts.sim = slv_sim;
      const auto report = ncs::solve(ncs::read_instance(slv_in), opts);
      if (!slv_out.empty()) ncs::write_report(slv_out, report);
      print_summary(report);
      if (!report.verified) std::cout << "NoSolutionFound\n";
      return report.verified ? 0 : kExitNoSolution;
    }
    if (*ver) {
      const auto report = ncs::read_report(ver_in);
      if (report.control.size() == 0) {
        std::cout << "report carries no control logic (method " << report.method << ")\n";
        return kExitNoSolution;
      }
      const auto sim = ncs::replay(report, ver_sim);
      double worst = 0.0;
      for (double v : sim.terminal_residuals) worst = std::max(worst, v);
      std::cout << "verified: " << (sim.verified ? "true" : "false") << "\n"
                << "max occupancy: " << sim.max_column_occupancy << "\n"
                << "worst terminal residual: " << worst << "\n";
      for (const auto& issue : sim.issues) std::cout << "  " << issue << "\n";
      return sim.verified ? 0 : kExitNoSolution;
    }
    if (*plt) {
      const auto files = ncs::export_plots(ncs::read_report(plt_in), plt_out);
      std::cout << "wrote " << files.control << ", " << files.schedule << ", " << files.trajectories << "\n";
      return 0;
    }
  } catch (const ncs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return 0;
}
