#pragma once

// Sparse routes to a capacity-respecting control logic: exhaustive search
// over channel assignments, per-plant l1 minimization with support grouping,
// and an exact restricted-isometry checker.

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ncs/linalg.hpp"
#include "ncs/lp.hpp"
#include "ncs/parallel.hpp"
#include "ncs/simulate.hpp"

namespace ncs {

/// Relative residual allowed on Phi u = -A^T xi.
inline constexpr double kResidualTolerance = 1e-8;

/// Largest number of supports rip_delta will enumerate.
inline constexpr double kRipSupportCap = 2e5;

/// Largest number of schedule sequences l0_feasible_bruteforce will enumerate.
inline constexpr double kBruteForceCap = 1e6;

struct RipReport {
  int order = 0;
  double delta = 0.0;
  /// delta < sqrt(2) - 1; meaningful when order is twice the sparsity of interest.
  bool certified = false;

  friend bool operator==(const RipReport&, const RipReport&) = default;
};

struct SparsitySolution {
  std::vector<Vector> per_plant_inputs;
  std::vector<int> sparsity;
  std::vector<std::vector<int>> supports;
  std::optional<std::vector<std::vector<std::size_t>>> groups;
};

inline int measure_sparsity(const Vector& u, double scale) {
  if (!(scale > 0)) throw Error(ErrorCode::InvalidArgument, "sparsity scale must be positive");
  const double cut = kZeroThreshold * scale;
  return static_cast<int>((u.array().abs() > cut).count());
}

inline std::vector<int> support_of(const Vector& u, double scale) {
  std::vector<int> s;
  const double cut = kZeroThreshold * scale;
  for (Eigen::Index t = 0; t < u.size(); ++t) {
    if (std::abs(u(t)) > cut) s.push_back(static_cast<int>(t));
  }
  return s;
}

inline double residual_norm(const Matrix& gamma, const Vector& u, const Vector& target) {
  return (gamma * u - target).norm();
}

inline bool within_residual(const Matrix& gamma, const Vector& u, const Vector& target) {
  return residual_norm(gamma, u, target) <= kResidualTolerance * (1.0 + target.norm());
}

/// minimize ||u||_1 subject to gamma u = target, as the split program
/// u = u+ - u-, u+- >= 0, minimize sum(u+ + u-).
///
/// The constraints are first replaced by the equivalent system
/// V^T u = Sigma^{-1} U^T target from a thin SVD of gamma, whose rows are
/// orthonormal; lifted matrices of unstable plants have columns spanning many
/// orders of magnitude, which a plain row scaling cannot repair. The basic
/// values of the optimal basis are then re-solved against the original matrix.
inline Vector l1_min(const Matrix& gamma, const Vector& target, const lp::Options& opts = {}) {
  if (gamma.rows() != target.size()) {
    throw Error(ErrorCode::InvalidArgument, "target length does not match matrix rows");
  }
  const Eigen::Index n = gamma.cols();
  if (target.isZero(0.0)) return Vector::Zero(n);

  Eigen::JacobiSVD<Matrix> svd(gamma, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const int rank = numerical_rank(gamma);
  if (rank == 0) throw Error(ErrorCode::Infeasible, "constraint matrix is zero");
  const Matrix U = svd.matrixU().leftCols(rank);
  const Matrix rows = svd.matrixV().leftCols(rank).transpose();
  if ((U * (U.transpose() * target) - target).norm() > kResidualTolerance * (1.0 + target.norm())) {
    throw Error(ErrorCode::Infeasible, "target lies outside the range of the constraint matrix");
  }
  const Vector rhs = (U.transpose() * target).cwiseQuotient(svd.singularValues().head(rank));

  Matrix split(rank, 2 * n);
  split << rows, -rows;
  const Vector cost = Vector::Ones(2 * n);
  const lp::Result res = lp::solve(split, rhs, cost, opts);
  if (res.status == lp::Status::Infeasible) {
    throw Error(ErrorCode::Infeasible, "no input sequence meets the equality constraints");
  }
  if (res.status != lp::Status::Optimal) {
    throw Error(ErrorCode::SolverStall, "l1 program stopped: " + lp::to_string(res.status) +
                                            " after " + std::to_string(res.iterations) + " iterations");
  }
  Vector u = res.x.head(n) - res.x.tail(n);

  std::vector<Eigen::Index> cols;
  for (Eigen::Index v : res.basis) cols.push_back(v % n);
  if (!cols.empty()) {
    Matrix sub(gamma.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = gamma.col(cols[k]);
    const Vector vals = sub.colPivHouseholderQr().solve(target);
    Vector refined = Vector::Zero(n);
    for (std::size_t k = 0; k < cols.size(); ++k) refined(cols[k]) = vals(static_cast<Eigen::Index>(k));
    if (refined.allFinite() && residual_norm(gamma, refined, target) < residual_norm(gamma, u, target)) {
      u = refined;
    }
  }
  if (!within_residual(gamma, u, target)) {
    throw Error(ErrorCode::SolverStall,
                "l1 solution residual " + std::to_string(residual_norm(gamma, u, target)) +
                    " exceeds tolerance (target norm " + std::to_string(target.norm()) + ")");
  }
  return u;
}

/// Minimum-l1 input sequence of length T steering xi to zero at T.
inline Vector l1_min_inputs(const PlantDynamics& p, const Vector& xi, int horizon) {
  if (xi.size() != p.dim()) throw Error(ErrorCode::InvalidArgument, "initial state has wrong length");
  if (!is_reachable(p)) throw Error(ErrorCode::NotReachable, "reachability matrix is rank deficient");
  if (horizon <= p.dim()) {
    throw Error(ErrorCode::HorizonTooShort,
                "horizon " + std::to_string(horizon) + " must exceed state dimension " +
                    std::to_string(p.dim()));
  }
  return l1_min(lifted_matrix(p, horizon), -propagate(p.A(), xi, horizon));
}

/// Packs plants into `capacity` groups so that supports inside a group are
/// pairwise disjoint (which also bounds each group's total sparsity by T).
/// Plants are taken by sparsity descending, ties by index, into the first
/// group that accepts them. Absent when the greedy packing fails.
inline std::optional<std::vector<std::vector<std::size_t>>> group_by_capacity(
    const std::vector<int>& sparsity, const std::vector<std::vector<int>>& supports, int capacity,
    int horizon, const std::vector<std::size_t>& members) {
  std::vector<std::size_t> order = members;
  std::sort(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sparsity.at(a) > sparsity.at(b); });
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(capacity));
  std::vector<std::vector<char>> used(groups.size(), std::vector<char>(static_cast<std::size_t>(horizon), 0));
  std::vector<int> load(groups.size(), 0);
  for (std::size_t i : order) {
    bool placed = false;
    for (std::size_t g = 0; g < groups.size() && !placed; ++g) {
      if (load[g] + sparsity[i] > horizon) continue;
      bool clash = false;
      for (int t : supports[i]) clash = clash || used[g][static_cast<std::size_t>(t)];
      if (clash) continue;
      for (int t : supports[i]) used[g][static_cast<std::size_t>(t)] = 1;
      load[g] += sparsity[i];
      groups[g].push_back(i);
      placed = true;
    }
    if (!placed) return std::nullopt;
  }
  for (auto& g : groups) std::sort(g.begin(), g.end());
  return groups;
}

inline std::optional<std::vector<std::vector<std::size_t>>> group_by_capacity(
    const std::vector<int>& sparsity, const std::vector<std::vector<int>>& supports, int capacity,
    int horizon) {
  std::vector<std::size_t> all(sparsity.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return group_by_capacity(sparsity, supports, capacity, horizon, all);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

/// Exact restricted isometry constant of the given order:
/// max over |S| = order of max(lambda_max - 1, 1 - lambda_min) of G_S^T G_S.
inline RipReport rip_delta(const Matrix& gamma, int order) {
  const int n = static_cast<int>(gamma.cols());
  if (order < 1 || order > n) {
    throw Error(ErrorCode::InvalidArgument, "RIP order must lie in [1, columns]");
  }
  if (binomial(n, order) > kRipSupportCap) {
    throw Error(ErrorCode::TooLarge, "C(" + std::to_string(n) + ", " + std::to_string(order) +
                                         ") supports exceed the enumeration cap");
  }
  const Matrix gram = gamma.transpose() * gamma;
  std::vector<int> idx(static_cast<std::size_t>(order));
  for (int k = 0; k < order; ++k) idx[static_cast<std::size_t>(k)] = k;
  double delta = 0.0;
  Matrix sub(order, order);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  while (true) {
    for (int a = 0; a < order; ++a) {
      for (int b = 0; b < order; ++b) sub(a, b) = gram(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    es.compute(sub, Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues();
    delta = std::max({delta, ev(ev.size() - 1) - 1.0, 1.0 - ev(0)});
    int k = order - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - order + k) --k;
    if (k < 0) break;
    ++idx[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < order; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  RipReport rep;
  rep.order = order;
  rep.delta = delta;
  rep.certified = delta < std::sqrt(2.0) - 1.0;
  return rep;
}

/// Number of channel-assignment sequences the brute-force search would visit.
inline double bruteforce_size(std::size_t plants, int capacity, int horizon) {
  double per_step = 0.0;
  for (int k = 0; k <= capacity; ++k) per_step += binomial(static_cast<int>(plants), k);
  return std::pow(per_step, horizon);
}

/// Exhaustive search over per-step access sets S_t (|S_t| <= M). For each
/// sequence, plant i must solve Phi_i restricted to {t : i in S_t} against
/// -A_i^T xi_i by least squares. Returns the first feasible logic in
/// enumeration order, or absent when none exists.
inline std::optional<ControlLogic> l0_feasible_bruteforce(const NcsInstance& inst) {
  const std::size_t n = inst.size();
  const int horizon = inst.horizon();
  if (bruteforce_size(n, inst.capacity(), horizon) > kBruteForceCap || horizon > 30 ||
      n > 20) {
    throw Error(ErrorCode::TooLarge, "instance exceeds the brute-force enumeration cap");
  }

  std::vector<std::uint64_t> subsets;  // plant bitmasks, by size then value
  for (int k = 0; k <= inst.capacity(); ++k) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      if (std::popcount(mask) == k) subsets.push_back(mask);
    }
  }

  std::vector<Matrix> phi(n);
  std::vector<Vector> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    phi[i] = lifted_matrix(inst.plant(i), horizon);
    target[i] = -propagate(inst.plant(i).A(), inst.initial_state(i), horizon);
  }

  std::vector<std::unordered_map<std::uint32_t, std::optional<Vector>>> memo(n);
  auto solve_plant = [&](std::size_t i, std::uint32_t cols) -> const std::optional<Vector>& {
    auto it = memo[i].find(cols);
    if (it != memo[i].end()) return it->second;
    std::vector<int> idx;
    for (int t = 0; t < horizon; ++t) {
      if (cols & (1u << t)) idx.push_back(t);
    }
    std::optional<Vector> out;
    Vector u = Vector::Zero(horizon);
    if (!idx.empty()) {
      Matrix sub(phi[i].rows(), static_cast<Eigen::Index>(idx.size()));
      for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = phi[i].col(idx[k]);
      const Vector v = sub.completeOrthogonalDecomposition().solve(target[i]);
      for (std::size_t k = 0; k < idx.size(); ++k) u(idx[k]) = v(static_cast<Eigen::Index>(k));
    }
    if (within_residual(phi[i], u, target[i])) out = u;
    return memo[i].emplace(cols, std::move(out)).first->second;
  };

  const std::uint32_t full = horizon == 32 ? ~0u : ((1u << horizon) - 1u);
  for (std::size_t i = 0; i < n; ++i) {
    if (!solve_plant(i, full)) return std::nullopt;
  }

  std::vector<std::size_t> choice(static_cast<std::size_t>(horizon), 0);
  while (true) {
    std::vector<std::uint32_t> cols(n, 0);
    for (int t = 0; t < horizon; ++t) {
      const std::uint64_t s = subsets[choice[static_cast<std::size_t>(t)]];
      for (std::size_t i = 0; i < n; ++i) {
        if (s & (std::uint64_t{1} << i)) cols[i] |= 1u << t;
      }
    }
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) ok = solve_plant(i, cols[i]).has_value();
    if (ok) {
      ControlLogic logic(n, horizon);
      for (std::size_t i = 0; i < n; ++i) {
        logic.u.row(static_cast<Eigen::Index>(i)) = solve_plant(i, cols[i])->transpose();
      }
      return logic;
    }
    int t = horizon - 1;
    while (t >= 0 && ++choice[static_cast<std::size_t>(t)] == subsets.size()) {
      choice[static_cast<std::size_t>(t)] = 0;
      --t;
    }
    if (t < 0) return std::nullopt;
  }
}

struct RelaxationOutcome {
  SparsitySolution solution;
  /// Per plant; absent when the plant was not part of the solve or the
  /// support enumeration exceeded the cap.
  std::vector<std::optional<RipReport>> rip;
  std::optional<ControlLogic> logic;
  bool verified = false;
  std::string failure;
};

/// Per-plant l1 solutions, grouped so that at most one plant per group acts
/// at each step. Plants outside `members` keep all-zero rows.
inline RelaxationOutcome solve_via_relaxation(const NcsInstance& inst,
                                              const std::vector<std::size_t>& members,
                                              const SimOptions& sim = {}) {
  const int horizon = inst.horizon();
  for (std::size_t i : members) {
    if (!is_reachable(inst.plant(i))) {
      throw Error(ErrorCode::NotReachable, "plant " + std::to_string(i + 1) + " is not reachable");
    }
    if (horizon <= inst.plant(i).dim()) {
      throw Error(ErrorCode::HorizonTooShort,
                  "horizon must exceed the dimension of plant " + std::to_string(i + 1));
    }
  }
  RelaxationOutcome out;
  auto& sol = out.solution;
  const std::size_t n = inst.size();
  sol.per_plant_inputs.assign(n, Vector::Zero(horizon));
  sol.sparsity.assign(n, 0);
  sol.supports.assign(n, {});
  out.rip.assign(n, std::nullopt);

  parallel_for(members.size(), [&](std::size_t k) {
    const std::size_t i = members[k];
    const auto& p = inst.plant(i);
    Vector u = l1_min_inputs(p, inst.initial_state(i), horizon);
    const double scale = input_scale(u);
    sol.sparsity[i] = measure_sparsity(u, scale);
    sol.supports[i] = support_of(u, scale);
    sol.per_plant_inputs[i] = std::move(u);
    const int order = 2 * sol.sparsity[i];
    if (order >= 1 && order <= horizon && binomial(horizon, order) <= kRipSupportCap) {
      out.rip[i] = rip_delta(lifted_matrix(p, horizon), order);
    }
  });

  sol.groups = group_by_capacity(sol.sparsity, sol.supports, inst.capacity(), horizon, members);
  if (!sol.groups) {
    out.failure = "l1 supports could not be packed into " + std::to_string(inst.capacity()) +
                  " slot-disjoint groups";
    return out;
  }
  ControlLogic logic(n, horizon);
  for (std::size_t i : members) logic.u.row(static_cast<Eigen::Index>(i)) = sol.per_plant_inputs[i].transpose();
  const SimulationResult res = verify_problem1(inst, logic, sim);
  out.verified = res.verified;
  if (!res.verified) {
    out.failure = "relaxed logic failed verification";
    for (const auto& issue : res.issues) out.failure += "; " + issue;
  }
  out.logic = std::move(logic);
  return out;
}

inline RelaxationOutcome solve_via_relaxation(const NcsInstance& inst, const SimOptions& sim = {}) {
  std::vector<std::size_t> all(inst.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return solve_via_relaxation(inst, all, sim);
}

}  // namespace ncs
