#pragma once

// End-to-end construction of a scheduling and control logic: open-loop
// preprocessing, the horizon necessary condition, then a cascade of
// construction routes where the first logic that passes simulation wins.

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ncs/instance_file.hpp"
#include "ncs/planner.hpp"
#include "ncs/simulate.hpp"
#include "ncs/sparse.hpp"

namespace ncs {

enum class Method { Auto, Lane, Block, Relax, Brute };

struct SolveOptions {
  Method method = Method::Auto;
  /// Use the exhaustive partition searches for plan rungs (at most 10 plants).
  bool exhaustive_plans = false;
  /// Record wall-clock timings in the report (breaks byte-identical output).
  bool timings = false;
  SimOptions sim;
};

struct RungRecord {
  std::string method;
  std::string outcome;  // "success" | "failed" | "skipped"
  std::string detail;

  friend bool operator==(const RungRecord&, const RungRecord&) = default;
};

struct RelaxationSummary {
  std::vector<int> sparsity;
  std::optional<std::vector<std::vector<std::size_t>>> groups;
  std::vector<std::optional<RipReport>> rip;

  friend bool operator==(const RelaxationSummary&, const RelaxationSummary&) = default;
};

struct NecessaryCondition {
  bool holds = true;
  int required_horizon = 0;
  std::size_t closed_loop_plants = 0;

  friend bool operator==(const NecessaryCondition&, const NecessaryCondition&) = default;
};

struct SolveReport {
  int schema_version = kSchemaVersion;
  /// lane-plan | block-plan | relaxation | bruteforce | open-loop | none
  std::string method = "none";
  bool verified = false;
  InstanceFile instance;
  NecessaryCondition necessary;
  std::vector<std::size_t> open_loop_plants;
  std::vector<RungRecord> rungs;
  std::optional<BlockPlan> block_plan;
  std::optional<LanePlan> lane_plan;
  SchedulingLogic schedule;
  /// N x T, empty when no logic was found.
  Matrix control;
  std::vector<double> residuals;
  std::size_t max_occupancy = 0;
  std::vector<std::size_t> occupancy_histogram;
  std::vector<std::string> warnings;
  std::vector<std::string> assumptions;
  std::optional<RelaxationSummary> relaxation;
  std::optional<std::map<std::string, double>> timings_ms;

  friend bool operator==(const SolveReport& x, const SolveReport& y) {
    const bool same_control = x.control.rows() == y.control.rows() &&
                              x.control.cols() == y.control.cols() && x.control == y.control;
    return same_control && x.schema_version == y.schema_version && x.method == y.method &&
           x.verified == y.verified && x.instance == y.instance && x.necessary == y.necessary &&
           x.open_loop_plants == y.open_loop_plants && x.rungs == y.rungs &&
           x.block_plan == y.block_plan && x.lane_plan == y.lane_plan && x.schedule == y.schedule &&
           x.residuals == y.residuals && x.max_occupancy == y.max_occupancy &&
           x.occupancy_histogram == y.occupancy_histogram && x.warnings == y.warnings &&
           x.assumptions == y.assumptions && x.relaxation == y.relaxation &&
           x.timings_ms == y.timings_ms;
  }
};

inline std::string method_name(Method m) {
  switch (m) {
    case Method::Auto: return "auto";
    case Method::Lane: return "lane-plan";
    case Method::Block: return "block-plan";
    case Method::Relax: return "relaxation";
    case Method::Brute: return "bruteforce";
  }
  return "unknown";
}

/// Exit status: 0 when verified, 2 when no logic was found.
inline int exit_code(const SolveReport& r) { return r.verified ? 0 : 2; }

namespace detail {

inline std::string index_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i : v) s += (s.empty() ? "" : ",") + std::to_string(i + 1);
  return s;
}

inline void conditioning_warnings(const NcsInstance& inst, const std::vector<std::size_t>& plants,
                                  std::vector<std::string>& out) {
  for (std::size_t i : plants) {
    const double cond = reach_condition(inst.plant(i));
    if (cond > kIllConditioned) {
      out.push_back("IllConditioned: plant " + std::to_string(i + 1) +
                    " reachability matrix condition number " + std::to_string(cond));
    }
  }
}

inline void fill_from_logic(SolveReport& rep, const NcsInstance& inst, const ControlLogic& logic,
                            const SimulationResult& sim, const SimOptions& opts) {
  const ControlLogic applied = zero_small_inputs(logic, opts.zero_threshold);
  rep.control = applied.u;
  rep.schedule = active_sets(applied, 0.0);
  rep.residuals = sim.terminal_residuals;
  rep.max_occupancy = sim.max_column_occupancy;
  rep.occupancy_histogram.assign(static_cast<std::size_t>(inst.capacity()) + 1, 0);
  for (const auto& slot : rep.schedule.slots) {
    if (slot.size() < rep.occupancy_histogram.size()) ++rep.occupancy_histogram[slot.size()];
  }
  rep.verified = sim.verified;
}

}  // namespace detail

/// Runs preprocessing and the requested route(s). Input problems (bad schema,
/// invalid instance) throw; an unsolved instance returns a report with
/// verified = false and the reason for every rung.
inline SolveReport solve(const InstanceFile& file, const SolveOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  std::map<std::string, double> timings;
  auto elapsed_ms = [](clock::time_point a) {
    return std::chrono::duration<double, std::milli>(clock::now() - a).count();
  };

  const NcsInstance inst = to_instance(file);
  SolveReport rep;
  rep.instance = file;

  std::vector<std::size_t> closed;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (open_loop_hit_time(inst.plant(i), inst.initial_state(i), inst.horizon())) {
      rep.open_loop_plants.push_back(i);
    } else {
      closed.push_back(i);
    }
  }
  rep.necessary.closed_loop_plants = closed.size();
  rep.necessary.required_horizon = ceil_div(closed.size(), inst.capacity());
  rep.necessary.holds = check_necessary(closed.size(), inst.capacity(), inst.horizon());
  if (!rep.open_loop_plants.empty()) {
    rep.rungs.push_back({"preprocessing", "success",
                         "plants reaching zero open-loop (zero input, no channel access): " +
                             detail::index_list(rep.open_loop_plants)});
  }

  auto finish = [&](SolveReport& r) -> SolveReport {
    if (opts.timings) {
      timings["total"] = elapsed_ms(t_start);
      r.timings_ms = timings;
    }
    return std::move(r);
  };

  if (closed.empty()) {
    const ControlLogic zero(inst.size(), inst.horizon());
    const SimulationResult sim = verify_problem1(inst, zero, opts.sim);
    detail::fill_from_logic(rep, inst, zero, sim, opts.sim);
    rep.method = sim.verified ? "open-loop" : "none";
    return finish(rep);
  }

  if (!rep.necessary.holds && opts.method != Method::Brute) {
    rep.rungs.push_back({"necessary-condition", "failed",
                         "NoSolutionFound: " + std::to_string(closed.size()) +
                             " plants need channel access but T=" + std::to_string(inst.horizon()) +
                             " < ceil(N/M)=" + std::to_string(rep.necessary.required_horizon)});
    return finish(rep);
  }
  if (closed.size() <= static_cast<std::size_t>(inst.capacity())) {
    rep.rungs.push_back({"preprocessing", "success",
                         "at most M plants need the channel; each can hold its own lane"});
  }

  std::vector<Method> cascade;
  if (opts.method == Method::Auto) {
    cascade = {Method::Lane, Method::Block, Method::Relax, Method::Brute};
  } else {
    cascade = {opts.method};
  }

  const bool exhaustive = opts.exhaustive_plans && closed.size() <= kExhaustivePlanLimit;
  for (Method m : cascade) {
    const auto t_rung = clock::now();
    const std::string name = method_name(m);
    std::optional<ControlLogic> logic;
    std::optional<BlockPlan> block;
    std::optional<LanePlan> lane;
    std::optional<RelaxationSummary> relax;
    std::vector<std::string> warnings;
    std::vector<std::string> assumptions;
    std::string failure;
    try {
      switch (m) {
        case Method::Lane:
          lane = exhaustive ? find_lane_plan_exhaustive(inst, closed) : find_lane_plan(inst, closed);
          if (lane) {
            logic = build_from_lane_plan(inst, *lane);
            detail::conditioning_warnings(inst, closed, warnings);
          } else {
            failure = exhaustive ? "exhaustive search: no lane plan exists"
                                 : "heuristic packing found no lane plan (not a proof of nonexistence)";
          }
          break;
        case Method::Block:
          block = exhaustive ? find_block_plan_exhaustive(inst, closed) : find_block_plan(inst, closed);
          if (block) {
            logic = build_from_block_plan(inst, *block);
            detail::conditioning_warnings(inst, closed, warnings);
          } else {
            failure = exhaustive ? "exhaustive search: no block plan exists"
                                 : "greedy grouping found no block plan (not a proof of nonexistence)";
          }
          break;
        case Method::Relax: {
          RelaxationOutcome out = solve_via_relaxation(inst, closed, opts.sim);
          relax = RelaxationSummary{out.solution.sparsity, out.solution.groups, out.rip};
          assumptions.push_back(
              "uniqueness of each plant's sparsest steering sequence is assumed, not certified");
          for (std::size_t i : closed) {
            const auto& r = out.rip[i];
            assumptions.push_back("plant " + std::to_string(i + 1) + ": l1 solution " +
                                  (r && r->certified ? "RIP-certified l0-optimal" : "uncertified"));
          }
          if (out.logic && out.verified) {
            logic = std::move(out.logic);
          } else {
            failure = out.failure;
          }
          break;
        }
        case Method::Brute:
          logic = l0_feasible_bruteforce(inst);
          if (!logic) failure = "exhaustive search: no capacity-respecting logic exists";
          break;
        case Method::Auto:
          break;
      }
    } catch (const Error& e) {
      failure = e.what();
      logic.reset();
    }
    if (opts.timings) timings[name] = elapsed_ms(t_rung);

    if (logic) {
      const SimulationResult sim = verify_problem1(inst, *logic, opts.sim);
      if (sim.verified) {
        rep.rungs.push_back({name, "success", ""});
        rep.method = name;
        rep.block_plan = std::move(block);
        rep.lane_plan = std::move(lane);
        rep.relaxation = std::move(relax);
        rep.warnings = std::move(warnings);
        rep.assumptions = std::move(assumptions);
        detail::fill_from_logic(rep, inst, *logic, sim, opts.sim);
        return finish(rep);
      }
      failure = "simulation rejected the logic";
      for (const auto& issue : sim.issues) failure += "; " + issue;
    }
    rep.rungs.push_back({name, "failed", failure});
    if (relax) rep.relaxation = std::move(relax);
  }
  if (!rep.necessary.holds) {
    rep.rungs.push_back({"necessary-condition", "failed",
                         "NoSolutionFound: T < ceil(N/M) for the plants needing channel access"});
  }
  return finish(rep);
}

/// Re-simulates the serialized control matrix against the embedded instance.
inline SimulationResult replay(const SolveReport& rep, const SimOptions& opts = {}) {
  const NcsInstance inst = to_instance(rep.instance);
  if (rep.control.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "report carries no control logic");
  }
  return verify_problem1(inst, ControlLogic(rep.control), opts);
}

}  // namespace ncs
