#pragma once

// SolveReport JSON (plant indices and time steps are 1-based on disk) and the
// CSV exports used for plotting.

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "ncs/instance_file.hpp"
#include "ncs/simulate.hpp"
#include "ncs/solve.hpp"

namespace ncs {

namespace detail {

inline json one_based(const std::vector<std::size_t>& v) {
  json a = json::array();
  for (std::size_t i : v) a.push_back(i + 1);
  return a;
}

inline std::vector<std::size_t> zero_based(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where + " must be an array");
  std::vector<std::size_t> v;
  for (const auto& e : j) {
    if (!e.is_number_unsigned() || e.get<std::size_t>() == 0) schema_fail(where + " must hold 1-based indices");
    v.push_back(e.get<std::size_t>() - 1);
  }
  return v;
}

template <typename T>
std::vector<T> list_of(const json& j, const std::string& where) {
  if (!j.is_array()) schema_fail(where + " must be an array");
  std::vector<T> v;
  for (const auto& e : j) v.push_back(e.get<T>());
  return v;
}

}  // namespace detail

inline json to_json(const SolveReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["method"] = r.method;
  j["verified"] = r.verified;
  j["necessary_condition"] = {{"holds", r.necessary.holds},
                              {"required_horizon", r.necessary.required_horizon},
                              {"closed_loop_plants", r.necessary.closed_loop_plants}};
  j["open_loop_plants"] = detail::one_based(r.open_loop_plants);
  json rungs = json::array();
  for (const auto& g : r.rungs) rungs.push_back({{"method", g.method}, {"outcome", g.outcome}, {"detail", g.detail}});
  j["rungs"] = std::move(rungs);

  if (r.block_plan) {
    json blocks = json::array();
    for (std::size_t k = 0; k < r.block_plan->blocks.size(); ++k) {
      blocks.push_back({{"plants", detail::one_based(r.block_plan->blocks[k])},
                        {"length", r.block_plan->block_lengths[k]},
                        {"offset", r.block_plan->offsets[k]}});
    }
    j["plan"] = {{"kind", "block"}, {"blocks", std::move(blocks)}};
  } else if (r.lane_plan) {
    json lanes = json::array();
    for (const auto& lane : r.lane_plan->lanes) {
      json l = json::array();
      for (std::size_t i : lane) l.push_back({{"plant", i + 1}, {"length", r.lane_plan->window_length.at(i)}});
      lanes.push_back(std::move(l));
    }
    j["plan"] = {{"kind", "lane"}, {"lanes", std::move(lanes)}};
  } else {
    j["plan"] = nullptr;
  }

  json slots = json::array();
  for (const auto& s : r.schedule.slots) slots.push_back(detail::one_based(s));
  j["schedule"] = std::move(slots);
  j["control"] = detail::matrix_json(r.control);
  j["residuals"] = r.residuals;
  j["max_occupancy"] = r.max_occupancy;
  j["occupancy_histogram"] = r.occupancy_histogram;
  j["warnings"] = r.warnings;
  j["assumptions"] = r.assumptions;
  if (r.relaxation) {
    json rip = json::array();
    for (const auto& rep : r.relaxation->rip) {
      if (rep) {
        rip.push_back({{"order", rep->order}, {"delta", rep->delta}, {"certified", rep->certified}});
      } else {
        rip.push_back(nullptr);
      }
    }
    json groups = nullptr;
    if (r.relaxation->groups) {
      groups = json::array();
      for (const auto& g : *r.relaxation->groups) groups.push_back(detail::one_based(g));
    }
    j["relaxation"] = {{"sparsity", r.relaxation->sparsity}, {"groups", std::move(groups)}, {"rip", std::move(rip)}};
  } else {
    j["relaxation"] = nullptr;
  }
  if (r.timings_ms) {
    json t = json::object();
    for (const auto& [k, v] : *r.timings_ms) t[k] = v;
    j["timings_ms"] = std::move(t);
  }
  j["instance"] = to_json(r.instance);
  return j;
}

inline SolveReport report_from_json(const json& j) {
  using detail::field;
  SolveReport r;
  try {
    r.schema_version = field(j, "schema_version").get<int>();
    if (r.schema_version != kSchemaVersion) detail::schema_fail("unsupported report schema_version");
    r.method = field(j, "method").get<std::string>();
    r.verified = field(j, "verified").get<bool>();
    const json& nc = field(j, "necessary_condition");
    r.necessary.holds = field(nc, "holds").get<bool>();
    r.necessary.required_horizon = field(nc, "required_horizon").get<int>();
    r.necessary.closed_loop_plants = field(nc, "closed_loop_plants").get<std::size_t>();
    r.open_loop_plants = detail::zero_based(field(j, "open_loop_plants"), "open_loop_plants");
    for (const auto& g : field(j, "rungs")) {
      r.rungs.push_back({field(g, "method").get<std::string>(), field(g, "outcome").get<std::string>(),
                         field(g, "detail").get<std::string>()});
    }
    const json& plan = field(j, "plan");
    if (!plan.is_null()) {
      const auto kind = field(plan, "kind").get<std::string>();
      if (kind == "block") {
        BlockPlan b;
        for (const auto& blk : field(plan, "blocks")) {
          b.blocks.push_back(detail::zero_based(field(blk, "plants"), "block plants"));
          b.block_lengths.push_back(field(blk, "length").get<int>());
          b.offsets.push_back(field(blk, "offset").get<int>());
        }
        r.block_plan = std::move(b);
      } else if (kind == "lane") {
        LanePlan l;
        for (const auto& lane : field(plan, "lanes")) {
          std::vector<std::size_t> members;
          for (const auto& e : lane) {
            const auto idx = field(e, "plant").get<std::size_t>();
            if (idx == 0) detail::schema_fail("lane plants are 1-based");
            members.push_back(idx - 1);
            l.window_length[idx - 1] = field(e, "length").get<int>();
          }
          l.lanes.push_back(std::move(members));
        }
        r.lane_plan = std::move(l);
      } else {
        detail::schema_fail("unknown plan kind '" + kind + "'");
      }
    }
    for (const auto& s : field(j, "schedule")) r.schedule.slots.push_back(detail::zero_based(s, "schedule"));
    r.control = detail::matrix_from(field(j, "control"), "control");
    r.residuals = detail::list_of<double>(field(j, "residuals"), "residuals");
    r.max_occupancy = field(j, "max_occupancy").get<std::size_t>();
    r.occupancy_histogram = detail::list_of<std::size_t>(field(j, "occupancy_histogram"), "occupancy_histogram");
    r.warnings = detail::list_of<std::string>(field(j, "warnings"), "warnings");
    r.assumptions = detail::list_of<std::string>(field(j, "assumptions"), "assumptions");
    const json& rel = field(j, "relaxation");
    if (!rel.is_null()) {
      RelaxationSummary s;
      s.sparsity = detail::list_of<int>(field(rel, "sparsity"), "sparsity");
      const json& groups = field(rel, "groups");
      if (!groups.is_null()) {
        s.groups.emplace();
        for (const auto& g : groups) s.groups->push_back(detail::zero_based(g, "groups"));
      }
      for (const auto& e : field(rel, "rip")) {
        if (e.is_null()) {
          s.rip.emplace_back();
        } else {
          s.rip.push_back(RipReport{field(e, "order").get<int>(), field(e, "delta").get<double>(),
                                    field(e, "certified").get<bool>()});
        }
      }
      r.relaxation = std::move(s);
    }
    if (j.contains("timings_ms")) {
      std::map<std::string, double> t;
      for (const auto& [k, v] : j.at("timings_ms").items()) t[k] = v.get<double>();
      r.timings_ms = std::move(t);
    }
    r.instance = instance_from_json(field(j, "instance"));
  } catch (const json::exception& e) {
    detail::schema_fail(std::string("malformed report: ") + e.what());
  }
  return r;
}

inline SolveReport read_report(const std::string& path) { return report_from_json(read_json_file(path)); }

inline void write_report(const std::string& path, const SolveReport& r) {
  write_text_file(path, dump(to_json(r)));
}

struct PlotFiles {
  std::string control;
  std::string schedule;
  std::string trajectories;
};

/// control.csv (t, plant, u), schedule.csv (t, plant) with one row per active
/// plant, trajectories.csv (t, plant, state_norm_2). Steps are 0-based as in
/// the dynamics, plants 1-based.
inline PlotFiles export_plots(const SolveReport& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir + ": " + ec.message());
  if (r.control.size() == 0) throw Error(ErrorCode::InvalidArgument, "report carries no control logic");

  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };

  std::string control = "t,plant,u\n";
  for (Eigen::Index t = 0; t < r.control.cols(); ++t) {
    for (Eigen::Index i = 0; i < r.control.rows(); ++i) {
      control += std::to_string(t) + "," + std::to_string(i + 1) + "," + num(r.control(i, t)) + "\n";
    }
  }
  std::string schedule = "t,plant\n";
  for (std::size_t t = 0; t < r.schedule.slots.size(); ++t) {
    for (std::size_t i : r.schedule.slots[t]) schedule += std::to_string(t) + "," + std::to_string(i + 1) + "\n";
  }
  const SimulationResult sim = replay(r);
  std::string traj = "t,plant,state_norm_2\n";
  const std::size_t steps = sim.trajectories.empty() ? 0 : sim.trajectories.front().size();
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < sim.trajectories.size(); ++i) {
      traj += std::to_string(t) + "," + std::to_string(i + 1) + "," + num(sim.trajectories[i][t].norm()) + "\n";
    }
  }
  PlotFiles files{(fs::path(out_dir) / "control.csv").string(), (fs::path(out_dir) / "schedule.csv").string(),
                  (fs::path(out_dir) / "trajectories.csv").string()};
  write_text_file(files.control, control);
  write_text_file(files.schedule, schedule);
  write_text_file(files.trajectories, traj);
  return files;
}

}  // namespace ncs
