#pragma once

// Core value types for a set of single-input plants sharing a channel, plus
// the small dense-matrix helpers everything else is built on.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncs/error.hpp"

namespace ncs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative factor below which a state or input entry counts as zero.
inline constexpr double kZeroThreshold = 1e-9;

/// Reachability-matrix condition number above which a warning is raised.
inline constexpr double kIllConditioned = 1e12;

namespace detail {

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace detail

/// One plant x(t+1) = A x(t) + b u(t) with scalar input.
class PlantDynamics {
 public:
  PlantDynamics(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() == 0 || A_.rows() != A_.cols()) {
      throw Error(ErrorCode::InvalidArgument,
                  "state matrix must be square and non-empty, got " +
                      detail::dims(A_.rows(), A_.cols()));
    }
    if (b_.size() != A_.rows()) {
      throw Error(ErrorCode::InvalidArgument,
                  "input vector length " + std::to_string(b_.size()) +
                      " does not match state dimension " + std::to_string(A_.rows()));
    }
    if (!A_.allFinite() || !b_.allFinite()) {
      throw Error(ErrorCode::NonFinite, "plant matrices contain non-finite entries");
    }
  }

  const Matrix& A() const noexcept { return A_; }
  const Vector& b() const noexcept { return b_; }
  int dim() const noexcept { return static_cast<int>(A_.rows()); }

 private:
  Matrix A_;
  Vector b_;
};

/// N plants with their initial states, channel capacity M and horizon T.
class NcsInstance {
 public:
  NcsInstance(std::vector<PlantDynamics> plants, std::vector<Vector> initial_states,
              int capacity, int horizon)
      : plants_(std::move(plants)),
        xi_(std::move(initial_states)),
        capacity_(capacity),
        horizon_(horizon) {
    const auto n = static_cast<int>(plants_.size());
    if (capacity_ <= 0 || capacity_ >= n) {
      throw Error(ErrorCode::InvalidArgument,
                  "capacity must satisfy 0 < M < N (M=" + std::to_string(capacity_) +
                      ", N=" + std::to_string(n) + ")");
    }
    if (horizon_ <= 0) {
      throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
    }
    if (xi_.size() != plants_.size()) {
      throw Error(ErrorCode::InvalidArgument, "one initial state per plant is required");
    }
    for (std::size_t i = 0; i < plants_.size(); ++i) {
      if (xi_[i].size() != plants_[i].dim()) {
        throw Error(ErrorCode::InvalidArgument,
                    "initial state of plant " + std::to_string(i + 1) + " has wrong length");
      }
      if (!xi_[i].allFinite()) {
        throw Error(ErrorCode::NonFinite,
                    "initial state of plant " + std::to_string(i + 1) + " is not finite");
      }
      if (xi_[i].isZero(0.0)) {
        throw Error(ErrorCode::InvalidArgument,
                    "initial state of plant " + std::to_string(i + 1) + " is zero");
      }
    }
  }

  std::size_t size() const noexcept { return plants_.size(); }
  int capacity() const noexcept { return capacity_; }
  int horizon() const noexcept { return horizon_; }
  const std::vector<PlantDynamics>& plants() const noexcept { return plants_; }
  const PlantDynamics& plant(std::size_t i) const { return plants_.at(i); }
  const std::vector<Vector>& initial_states() const noexcept { return xi_; }
  const Vector& initial_state(std::size_t i) const { return xi_.at(i); }

 private:
  std::vector<PlantDynamics> plants_;
  std::vector<Vector> xi_;
  int capacity_;
  int horizon_;
};

/// Inputs u_i(t) for every plant i (rows) and step t (columns).
struct ControlLogic {
  Matrix u;

  ControlLogic() = default;
  ControlLogic(std::size_t plants, int horizon)
      : u(Matrix::Zero(static_cast<Eigen::Index>(plants), horizon)) {}
  explicit ControlLogic(Matrix inputs) : u(std::move(inputs)) {}

  std::size_t plants() const noexcept { return static_cast<std::size_t>(u.rows()); }
  int horizon() const noexcept { return static_cast<int>(u.cols()); }

  friend bool operator==(const ControlLogic& a, const ControlLogic& b) {
    return a.u.rows() == b.u.rows() && a.u.cols() == b.u.cols() && a.u == b.u;
  }
};

/// Per-step sets of plants (0-based) granted the channel.
struct SchedulingLogic {
  std::vector<std::vector<std::size_t>> slots;

  std::size_t max_occupancy() const {
    std::size_t m = 0;
    for (const auto& s : slots) m = std::max(m, s.size());
    return m;
  }

  friend bool operator==(const SchedulingLogic&, const SchedulingLogic&) = default;
};

/// Scale an input row is compared against: max(1, max_t |u(t)|).
template <typename Derived>
double input_scale(const Eigen::MatrixBase<Derived>& row) {
  return row.size() == 0 ? 1.0 : std::max(1.0, row.cwiseAbs().maxCoeff());
}

/// A^k by iterated multiplication.
inline Matrix mat_pow(const Matrix& A, int k) {
  if (A.rows() != A.cols()) {
    throw Error(ErrorCode::InvalidArgument, "mat_pow needs a square matrix");
  }
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "mat_pow needs k >= 0");
  Matrix result = Matrix::Identity(A.rows(), A.cols());
  for (int i = 0; i < k; ++i) result = A * result;
  if (!result.allFinite()) {
    throw Error(ErrorCode::NonFinite, "matrix power overflowed at k=" + std::to_string(k));
  }
  return result;
}

/// A^k x by iterated matrix-vector products; bitwise identical to a zero-input
/// forward simulation of the same plant.
inline Vector propagate(const Matrix& A, const Vector& x, int k) {
  Vector y = x;
  for (int i = 0; i < k; ++i) y = A * y;
  if (!y.allFinite()) {
    throw Error(ErrorCode::NonFinite, "state propagation overflowed at k=" + std::to_string(k));
  }
  return y;
}

/// [A^{d-1} b, ..., A b, b].
inline Matrix reach_matrix(const PlantDynamics& p) {
  const int d = p.dim();
  Matrix psi(d, d);
  Vector col = p.b();
  for (int c = d - 1; c >= 0; --c) {
    psi.col(c) = col;
    col = p.A() * col;
  }
  return psi;
}

/// [A^{T-1} b, ..., A b, b]; column t multiplies u(t) in x(T).
inline Matrix lifted_matrix(const PlantDynamics& p, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
  Matrix phi(p.dim(), horizon);
  Vector col = p.b();
  for (int c = horizon - 1; c >= 0; --c) {
    phi.col(c) = col;
    if (c > 0) col = p.A() * col;
  }
  if (!phi.allFinite()) throw Error(ErrorCode::NonFinite, "lifted matrix overflowed");
  return phi;
}

/// Rank with singular values counted when sigma > max(rows, cols) * eps * sigma_max.
inline int numerical_rank(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<double>::epsilon() * s(0);
  return static_cast<int>((s.array() > tol).count());
}

inline bool is_reachable(const PlantDynamics& p) {
  return numerical_rank(reach_matrix(p)) == p.dim();
}

/// 2-norm condition number of the reachability matrix (infinity when singular).
inline double reach_condition(const PlantDynamics& p) {
  Eigen::JacobiSVD<Matrix> svd(reach_matrix(p));
  const Vector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

/// Smallest tau in [1, T] with ||A^tau xi|| <= threshold * ||xi||.
inline std::optional<int> open_loop_hit_time(const PlantDynamics& p, const Vector& xi,
                                             int horizon) {
  if (xi.size() != p.dim()) {
    throw Error(ErrorCode::InvalidArgument, "initial state has wrong length");
  }
  const double scale = xi.norm();
  Vector x = xi;
  for (int tau = 1; tau <= horizon; ++tau) {
    x = p.A() * x;
    if (!x.allFinite()) return std::nullopt;
    if (x.norm() <= kZeroThreshold * scale) return tau;
  }
  return std::nullopt;
}

inline double spectral_radius(const Matrix& A) {
  Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace ncs
