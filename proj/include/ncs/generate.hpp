#pragma once

// Seeded random instances: Schur-unstable, reachable plants with entries
// uniform in [-range, range] and initial states uniform in [-1, 1]^d.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncs/linalg.hpp"

namespace ncs {

inline constexpr int kRejectionBudget = 10000;

/// Uniform doubles from a standard-specified engine; the mapping is done by
/// hand so the stream is identical across standard libraries.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

struct GeneratedInstance {
  std::vector<Matrix> A;
  std::vector<Vector> b;
  std::vector<Vector> xi;
  int capacity = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
};

inline bool is_schur_unstable(const Matrix& A) { return spectral_radius(A) > 1.0 + 1e-9; }

inline GeneratedInstance generate_instance(std::size_t plants, int capacity, int horizon,
                                           const std::vector<int>& dims, double range,
                                           std::uint64_t seed) {
  if (capacity <= 0 || static_cast<std::size_t>(capacity) >= plants) {
    throw Error(ErrorCode::InvalidArgument, "capacity must satisfy 0 < M < N");
  }
  if (horizon <= 0) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (dims.size() != plants) {
    throw Error(ErrorCode::InvalidArgument, "need one dimension per plant (got " +
                                                std::to_string(dims.size()) + " for " +
                                                std::to_string(plants) + " plants)");
  }
  if (!(range > 0)) throw Error(ErrorCode::InvalidArgument, "entry range must be positive");

  UniformSource rng(seed);
  GeneratedInstance g;
  g.capacity = capacity;
  g.horizon = horizon;
  g.seed = seed;
  for (std::size_t i = 0; i < plants; ++i) {
    const int d = dims[i];
    if (d <= 0) throw Error(ErrorCode::InvalidArgument, "dimensions must be positive");
    bool accepted = false;
    for (int attempt = 0; attempt < kRejectionBudget && !accepted; ++attempt) {
      Matrix A(d, d);
      Vector b(d);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) A(r, c) = rng.uniform(-range, range);
      }
      for (int r = 0; r < d; ++r) b(r) = rng.uniform(-range, range);
      if (is_schur_unstable(A) && is_reachable(PlantDynamics(A, b))) {
        g.A.push_back(std::move(A));
        g.b.push_back(std::move(b));
        accepted = true;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::RejectionBudgetExceeded,
                  "plant " + std::to_string(i + 1) + " rejected " + std::to_string(kRejectionBudget) +
                      " times");
    }
  }
  for (std::size_t i = 0; i < plants; ++i) {
    Vector x(dims[i]);
    do {
      for (int r = 0; r < dims[i]; ++r) x(r) = rng.uniform(-1.0, 1.0);
    } while (x.isZero(0.0));
    g.xi.push_back(std::move(x));
  }
  return g;
}

inline NcsInstance to_instance(const GeneratedInstance& g) {
  std::vector<PlantDynamics> plants;
  for (std::size_t i = 0; i < g.A.size(); ++i) plants.emplace_back(g.A[i], g.b[i]);
  return NcsInstance(std::move(plants), g.xi, g.capacity, g.horizon);
}

/// 50 planar and 50 three-dimensional plants, M = 10, T = 50, entries in [-2, 2].
inline std::vector<int> benchmark_dims() {
  std::vector<int> dims(50, 2);
  dims.insert(dims.end(), 50, 3);
  return dims;
}

}  // namespace ncs
