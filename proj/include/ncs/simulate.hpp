#pragma once

// Schedule extraction and forward simulation of the networked plants.

#include <cstddef>
#include <string>
#include <vector>

#include "ncs/linalg.hpp"

namespace ncs {

struct SimOptions {
  /// Bound on ||x_i(T)|| / max(1, max_t ||x_i(t)||).
  double terminal_tolerance = 1e-6;
  /// Relative zero threshold for inputs and states.
  double zero_threshold = kZeroThreshold;
};

struct SimulationResult {
  /// trajectories[i][t] = x_i(t), t = 0..T.
  std::vector<std::vector<Vector>> trajectories;
  std::vector<double> terminal_residuals;
  std::size_t max_column_occupancy = 0;
  bool verified = false;
  /// Human-readable reasons when verified is false.
  std::vector<std::string> issues;
};

/// Copy of the logic with every entry |u_i(t)| <= threshold * max(1, ||u_i||_inf)
/// replaced by an exact zero.
inline ControlLogic zero_small_inputs(const ControlLogic& logic,
                                      double zero_threshold = kZeroThreshold) {
  ControlLogic out = logic;
  for (Eigen::Index i = 0; i < out.u.rows(); ++i) {
    const double cut = zero_threshold * input_scale(logic.u.row(i));
    for (Eigen::Index t = 0; t < out.u.cols(); ++t) {
      if (std::abs(out.u(i, t)) <= cut) out.u(i, t) = 0.0;
    }
  }
  return out;
}

/// Plants with a nonzero input at each step, without a capacity check.
inline SchedulingLogic active_sets(const ControlLogic& logic,
                                   double zero_threshold = kZeroThreshold) {
  const ControlLogic z = zero_small_inputs(logic, zero_threshold);
  SchedulingLogic s;
  s.slots.resize(static_cast<std::size_t>(z.u.cols()));
  for (Eigen::Index t = 0; t < z.u.cols(); ++t) {
    for (Eigen::Index i = 0; i < z.u.rows(); ++i) {
      if (z.u(i, t) != 0.0) s.slots[static_cast<std::size_t>(t)].push_back(static_cast<std::size_t>(i));
    }
  }
  return s;
}

/// Channel assignment implied by a control logic; throws CapacityViolation
/// when a step needs more than `capacity` plants.
inline SchedulingLogic extract_schedule(const ControlLogic& logic, int capacity,
                                        double zero_threshold = kZeroThreshold) {
  SchedulingLogic s = active_sets(logic, zero_threshold);
  for (std::size_t t = 0; t < s.slots.size(); ++t) {
    if (s.slots[t].size() > static_cast<std::size_t>(capacity)) {
      throw Error(ErrorCode::CapacityViolation,
                  "step " + std::to_string(t + 1) + " has " + std::to_string(s.slots[t].size()) +
                      " active plants, capacity is " + std::to_string(capacity));
    }
  }
  return s;
}

/// Forward recursion x(t+1) = A x(t) + b u(t) for every plant. Inputs are
/// thresholded first so the trajectory is the one the extracted schedule
/// produces; a state whose norm falls under the zero threshold (relative to
/// the running trajectory maximum, floor 1) has reached the origin and is set
/// to exactly zero.
inline SimulationResult simulate(const NcsInstance& inst, const ControlLogic& logic,
                                 const SimOptions& opts = {}) {
  const int horizon = inst.horizon();
  if (logic.plants() != inst.size() || logic.horizon() != horizon) {
    throw Error(ErrorCode::InvalidArgument,
                "control logic is " + detail::dims(logic.u.rows(), logic.u.cols()) +
                    ", instance needs " +
                    detail::dims(static_cast<Eigen::Index>(inst.size()), horizon));
  }
  const ControlLogic applied = zero_small_inputs(logic, opts.zero_threshold);

  SimulationResult res;
  res.trajectories.resize(inst.size());
  res.terminal_residuals.resize(inst.size());
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const auto& p = inst.plant(i);
    auto& traj = res.trajectories[i];
    traj.reserve(static_cast<std::size_t>(horizon) + 1);
    traj.push_back(inst.initial_state(i));
    double running_max = std::max(1.0, traj.back().norm());
    for (int t = 0; t < horizon; ++t) {
      Vector next = p.A() * traj.back() + p.b() * applied.u(static_cast<Eigen::Index>(i), t);
      if (!next.allFinite()) {
        throw Error(ErrorCode::NonFinite, "state of plant " + std::to_string(i + 1) +
                                              " overflowed at step " + std::to_string(t + 1));
      }
      const double nrm = next.norm();
      running_max = std::max(running_max, nrm);
      if (nrm <= opts.zero_threshold * running_max) next.setZero();
      traj.push_back(std::move(next));
    }
    res.terminal_residuals[i] = traj.back().norm() / running_max;
  }

  const SchedulingLogic sched = active_sets(applied, 0.0);
  res.max_column_occupancy = sched.max_occupancy();

  res.verified = true;
  for (std::size_t i = 0; i < inst.size(); ++i) {
    if (!(res.terminal_residuals[i] <= opts.terminal_tolerance)) {
      res.verified = false;
      res.issues.push_back("plant " + std::to_string(i + 1) + " terminal residual " +
                           std::to_string(res.terminal_residuals[i]));
    }
  }
  if (res.max_column_occupancy > static_cast<std::size_t>(inst.capacity())) {
    res.verified = false;
    for (std::size_t t = 0; t < sched.slots.size(); ++t) {
      if (sched.slots[t].size() > static_cast<std::size_t>(inst.capacity())) {
        res.issues.push_back("CapacityViolation: step " + std::to_string(t + 1) + " has " +
                             std::to_string(sched.slots[t].size()) + " active plants");
      }
    }
  }
  return res;
}

/// Simulation plus both terminal and capacity conditions; `verified` on the
/// result is the authoritative verdict.
inline SimulationResult verify_problem1(const NcsInstance& inst, const ControlLogic& logic,
                                        const SimOptions& opts = {}) {
  return simulate(inst, logic, opts);
}

}  // namespace ncs
