#pragma once

// Dense two-phase revised simplex for small standard-form programs
//
//   minimize c^T x  subject to  A x = b,  x >= 0.
//
// Sized for a handful of rows and a few hundred columns. Bland's rule picks
// both the entering and leaving variable, which rules out cycling and makes
// the result a deterministic function of the input. The basis is refactored
// from scratch every iteration.

#include <Eigen/LU>

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "ncs/linalg.hpp"

namespace ncs::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

struct Options {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-12;
  int max_iterations = 50000;
};

struct Result {
  Status status = Status::Infeasible;
  Vector x;
  double objective = 0.0;
  /// Column indices of the final basis (rows that were redundant are dropped).
  std::vector<Eigen::Index> basis;
  int iterations = 0;
};

namespace detail {

struct Tableau {
  Matrix A;  // m x n_total
  Vector b;
  std::vector<Eigen::Index> basis;
  std::vector<char> in_basis;
};

/// Runs simplex iterations on `tab` with costs `c` over columns
/// [0, allowed). Returns Optimal, Unbounded or IterationLimit.
inline Status iterate(Tableau& tab, const Vector& c, Eigen::Index allowed, const Options& opt,
                      int& iterations) {
  const Eigen::Index m = tab.A.rows();
  while (true) {
    if (iterations >= opt.max_iterations) return Status::IterationLimit;
    ++iterations;
    Matrix B(m, m);
    Vector cb(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      B.col(r) = tab.A.col(tab.basis[static_cast<std::size_t>(r)]);
      cb(r) = c(tab.basis[static_cast<std::size_t>(r)]);
    }
    Eigen::PartialPivLU<Matrix> lu(B);
    const Vector xb = lu.solve(tab.b);
    const Vector y = lu.transpose().solve(cb);

    const double cscale = std::max(1.0, c.head(allowed).cwiseAbs().maxCoeff());
    Eigen::Index entering = -1;
    for (Eigen::Index j = 0; j < allowed; ++j) {
      if (tab.in_basis[static_cast<std::size_t>(j)]) continue;
      const double rj = c(j) - y.dot(tab.A.col(j));
      if (rj < -opt.optimality_tol * cscale) {
        entering = j;
        break;
      }
    }
    if (entering < 0) return Status::Optimal;

    const Vector dir = lu.solve(tab.A.col(entering));
    const double dscale = std::max(dir.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    Eigen::Index leave_row = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < m; ++r) {
      if (dir(r) <= opt.pivot_tol * dscale) continue;
      const double ratio = std::max(0.0, xb(r)) / dir(r);
      const double slack = 1e-12 * std::max(1.0, std::abs(best_ratio));
      if (leave_row < 0 || ratio < best_ratio - slack) {
        best_ratio = ratio;
        leave_row = r;
      } else if (ratio <= best_ratio + slack &&
                 tab.basis[static_cast<std::size_t>(r)] < tab.basis[static_cast<std::size_t>(leave_row)]) {
        leave_row = r;
      }
    }
    if (leave_row < 0) return Status::Unbounded;
    tab.in_basis[static_cast<std::size_t>(tab.basis[static_cast<std::size_t>(leave_row)])] = 0;
    tab.basis[static_cast<std::size_t>(leave_row)] = entering;
    tab.in_basis[static_cast<std::size_t>(entering)] = 1;
  }
}

}  // namespace detail

/// Solves min c^T x, A x = b, x >= 0.
inline Result solve(const Matrix& A, const Vector& b, const Vector& c, const Options& opt = {}) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (b.size() != m || c.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "LP dimensions are inconsistent");
  }
  Result res;

  // Phase I: artificial columns n..n+m-1 with the sign of b folded in.
  detail::Tableau tab;
  tab.A = Matrix::Zero(m, n + m);
  tab.A.leftCols(n) = A;
  tab.b = b;
  for (Eigen::Index r = 0; r < m; ++r) {
    if (tab.b(r) < 0) {
      tab.A.row(r).head(n) *= -1.0;
      tab.b(r) = -tab.b(r);
    }
    tab.A(r, n + r) = 1.0;
  }
  tab.in_basis.assign(static_cast<std::size_t>(n + m), 0);
  for (Eigen::Index r = 0; r < m; ++r) {
    tab.basis.push_back(n + r);
    tab.in_basis[static_cast<std::size_t>(n + r)] = 1;
  }
  Vector c1 = Vector::Zero(n + m);
  c1.tail(m).setOnes();
  Status st = detail::iterate(tab, c1, n + m, opt, res.iterations);
  if (st == Status::IterationLimit) {
    res.status = st;
    return res;
  }

  auto basic_solution = [&](const detail::Tableau& t) {
    const Eigen::Index rows = t.A.rows();
    Matrix B(rows, rows);
    for (Eigen::Index r = 0; r < rows; ++r) B.col(r) = t.A.col(t.basis[static_cast<std::size_t>(r)]);
    return Vector(Eigen::PartialPivLU<Matrix>(B).solve(t.b));
  };
  {
    const Vector xb = basic_solution(tab);
    double infeas = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
      if (tab.basis[static_cast<std::size_t>(r)] >= n) infeas += std::abs(xb(r));
    }
    if (infeas > opt.feasibility_tol * std::max(1.0, tab.b.cwiseAbs().maxCoeff())) {
      res.status = Status::Infeasible;
      return res;
    }
  }

  // Drive remaining artificials out of the basis; drop rows that are redundant.
  for (Eigen::Index r = 0; r < tab.A.rows();) {
    const Eigen::Index var = tab.basis[static_cast<std::size_t>(r)];
    if (var < n) {
      ++r;
      continue;
    }
    const Eigen::Index rows = tab.A.rows();
    Matrix B(rows, rows);
    for (Eigen::Index k = 0; k < rows; ++k) B.col(k) = tab.A.col(tab.basis[static_cast<std::size_t>(k)]);
    Eigen::PartialPivLU<Matrix> lu(B);
    Eigen::Index replacement = -1;
    double best = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (tab.in_basis[static_cast<std::size_t>(j)]) continue;
      const double v = std::abs(lu.solve(tab.A.col(j))(r));
      if (v > best * (1.0 + 1e-9) && v > 1e-9 * std::max(1.0, tab.A.col(j).cwiseAbs().maxCoeff())) {
        best = v;
        replacement = j;
      }
    }
    if (replacement >= 0) {
      tab.in_basis[static_cast<std::size_t>(var)] = 0;
      tab.basis[static_cast<std::size_t>(r)] = replacement;
      tab.in_basis[static_cast<std::size_t>(replacement)] = 1;
      ++r;
    } else {
      // Row r is a combination of the others: remove it with its artificial.
      Matrix A2(rows - 1, tab.A.cols());
      Vector b2(rows - 1);
      for (Eigen::Index k = 0, o = 0; k < rows; ++k) {
        if (k == r) continue;
        A2.row(o) = tab.A.row(k);
        b2(o) = tab.b(k);
        ++o;
      }
      tab.A = std::move(A2);
      tab.b = std::move(b2);
      tab.in_basis[static_cast<std::size_t>(var)] = 0;
      tab.basis.erase(tab.basis.begin() + r);
    }
  }

  // Phase II over structural columns only.
  Vector c2 = Vector::Zero(n + m);
  c2.head(n) = c;
  if (!tab.basis.empty()) {
    st = detail::iterate(tab, c2, n, opt, res.iterations);
  } else {
    st = Status::Optimal;
  }
  res.status = st;
  if (st != Status::Optimal) return res;

  res.x = Vector::Zero(n);
  if (!tab.basis.empty()) {
    const Vector xb = basic_solution(tab);
    for (std::size_t r = 0; r < tab.basis.size(); ++r) res.x(tab.basis[r]) = std::max(0.0, xb(static_cast<Eigen::Index>(r)));
  }
  res.basis = tab.basis;
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace ncs::lp
