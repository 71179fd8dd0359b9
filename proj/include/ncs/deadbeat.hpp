#pragma once

// Finite-window input bursts that drive a reachable plant to the origin.
//
// A window of length L > d starts with L - d zeros and ends with
// v = -Psi^{-1} A^L x0, where Psi = [A^{d-1} b, ..., b]. The last d inputs
// multiply exactly the columns of Psi in x(L), so x(L) = A^L x0 + Psi v = 0.

#include <Eigen/QR>

#include <cstddef>
#include <string>

#include "ncs/linalg.hpp"

namespace ncs {

struct DeadbeatWindow {
  std::size_t plant = 0;
  int start = 0;
  int length = 0;
  Vector inputs;
};

namespace detail {

inline void require_window(const PlantDynamics& p, const Vector& xi, int d_hat) {
  if (xi.size() != p.dim()) {
    throw Error(ErrorCode::InvalidArgument, "initial state has wrong length");
  }
  if (d_hat <= p.dim()) {
    throw Error(ErrorCode::InvalidArgument,
                "window length " + std::to_string(d_hat) +
                    " must exceed the state dimension " + std::to_string(p.dim()));
  }
  if (!is_reachable(p)) {
    throw Error(ErrorCode::NotReachable, "reachability matrix is rank deficient");
  }
}

}  // namespace detail

/// Inputs of length d_hat steering xi to zero at step d_hat.
inline Vector deadbeat_inputs(const PlantDynamics& p, const Vector& xi, int d_hat) {
  detail::require_window(p, xi, d_hat);
  const int d = p.dim();
  const Matrix psi = reach_matrix(p);
  const Vector target = -propagate(p.A(), xi, d_hat);
  Vector u = Vector::Zero(d_hat);
  u.tail(d) = psi.colPivHouseholderQr().solve(target);
  if (!u.allFinite()) throw Error(ErrorCode::NonFinite, "deadbeat inputs are not finite");
  return u;
}

/// Full-horizon input row: zeros, then the window applied to A^{d_tilde} xi
/// on [d_tilde, d_tilde + d_hat), then zeros.
inline Vector windowed_inputs(const PlantDynamics& p, const Vector& xi, int d_tilde, int d_hat,
                              int horizon) {
  if (d_tilde < 0) throw Error(ErrorCode::InvalidArgument, "window offset must be >= 0");
  if (d_tilde + d_hat > horizon) {
    throw Error(ErrorCode::WindowOverflow,
                "window [" + std::to_string(d_tilde) + ", " + std::to_string(d_tilde + d_hat) +
                    ") exceeds horizon " + std::to_string(horizon));
  }
  detail::require_window(p, xi, d_hat);
  Vector row = Vector::Zero(horizon);
  row.segment(d_tilde, d_hat) = deadbeat_inputs(p, propagate(p.A(), xi, d_tilde), d_hat);
  return row;
}

inline DeadbeatWindow make_window(std::size_t plant_index, const PlantDynamics& p,
                                  const Vector& xi, int d_tilde, int d_hat, int horizon) {
  Vector row = windowed_inputs(p, xi, d_tilde, d_hat, horizon);
  return {plant_index, d_tilde, d_hat, row.segment(d_tilde, d_hat)};
}

}  // namespace ncs
