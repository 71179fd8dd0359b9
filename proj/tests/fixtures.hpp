#pragma once

#include <initializer_list>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "ncs/ncs.hpp"

namespace ncs::test {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double e : v) x(k++) = e;
  return x;
}

/// Scalar plants x(t+1) = a x + b u.
inline InstanceFile scalar_file(const std::vector<double>& a, const std::vector<double>& b,
                                const std::vector<double>& xi, int capacity, int horizon) {
  InstanceFile f;
  f.capacity = capacity;
  f.horizon = horizon;
  for (std::size_t i = 0; i < a.size(); ++i) {
    f.A.push_back(Matrix::Constant(1, 1, a[i]));
    f.b.push_back(Vector::Constant(1, b[i]));
    f.xi.push_back(Vector::Constant(1, xi[i]));
  }
  return f;
}

inline ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an ncs::Error";
  return ErrorCode::IoError;
}

}  // namespace ncs::test
