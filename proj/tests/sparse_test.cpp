#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using ncs::Matrix;
using ncs::Vector;
using ncs::test::mat;
using ncs::test::vec;

TEST(Simplex, SmallProgram) {
  // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
  const Matrix A = mat({{1, 2, 1, 0}, {3, 1, 0, 1}});
  const auto r = ncs::lp::solve(A, vec({4, 6}), vec({-1, -1, 0, 0}));
  ASSERT_EQ(r.status, ncs::lp::Status::Optimal);
  EXPECT_NEAR(r.objective, -2.8, 1e-12);
  EXPECT_NEAR(r.x(0), 1.6, 1e-12);
  EXPECT_NEAR(r.x(1), 1.2, 1e-12);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  EXPECT_EQ(ncs::lp::solve(mat({{1, 1}}), vec({-1}), vec({1, 1})).status, ncs::lp::Status::Infeasible);
  EXPECT_EQ(ncs::lp::solve(mat({{1, -1}}), vec({1}), vec({-1, 0})).status, ncs::lp::Status::Unbounded);
}

TEST(Simplex, DegenerateCyclingExample) {
  // Beale's example cycles under the textbook largest-coefficient rule.
  const Matrix A = mat({{1, 0, 0, 0.25, -60, -0.04, 9},
                        {0, 1, 0, 0.5, -90, -0.02, 3},
                        {0, 0, 1, 0, 0, 1, 0}});
  const auto r = ncs::lp::solve(A, vec({0, 0, 1}), vec({0, 0, 0, -0.75, 150, -0.02, 6}));
  ASSERT_EQ(r.status, ncs::lp::Status::Optimal);
  EXPECT_NEAR(r.objective, -0.05, 1e-12);
}

TEST(Simplex, RedundantRows) {
  const Matrix A = mat({{1, 1, 0}, {2, 2, 0}, {0, 1, 1}});
  const auto r = ncs::lp::solve(A, vec({1, 2, 1}), vec({1, 2, 0}));
  ASSERT_EQ(r.status, ncs::lp::Status::Optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-12);
  EXPECT_LE((A * r.x - vec({1, 2, 1})).norm(), 1e-12);
}

TEST(L1, ScalarExamples) {
  EXPECT_LE((ncs::l1_min(mat({{2, 1}}), vec({2})) - vec({1, 0})).norm(), 1e-12);
  const ncs::PlantDynamics p(mat({{2}}), vec({1}));
  EXPECT_LE((ncs::l1_min_inputs(p, vec({1}), 2) - vec({-2, 0})).norm(), 1e-12);
  EXPECT_EQ(ncs::l1_min(mat({{2, 1}}), vec({0})), Vector::Zero(2));
}

TEST(L1, Errors) {
  EXPECT_EQ(ncs::test::code_of([] { ncs::l1_min(mat({{1, 1}, {1, 1}}), vec({1, 2})); }),
            ncs::ErrorCode::Infeasible);
  const ncs::PlantDynamics p(mat({{1, 1}, {0, 1}}), vec({0, 1}));
  EXPECT_EQ(ncs::test::code_of([&] { ncs::l1_min_inputs(p, vec({1, 0}), 2); }),
            ncs::ErrorCode::HorizonTooShort);
  const ncs::PlantDynamics q(mat({{2}}), vec({0}));
  EXPECT_EQ(ncs::test::code_of([&] { ncs::l1_min_inputs(q, vec({1}), 3); }), ncs::ErrorCode::NotReachable);
}

TEST(L1, MatchesVertexEnumeration) {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> N(0, 1);
  for (int trial = 0; trial < 80; ++trial) {
    const int rows = 1 + trial % 3;
    const int cols = rows + 1 + trial % 5;
    Matrix G(rows, cols);
    Vector y(rows);
    for (int r = 0; r < rows; ++r) {
      y(r) = N(rng);
      for (int c = 0; c < cols; ++c) G(r, c) = N(rng);
    }
    const Vector u = ncs::l1_min(G, y);
    const auto ref = ncs::oracle::l1_by_vertices(G, y);
    ASSERT_TRUE(ref.has_value());
    EXPECT_LE((G * u - y).norm(), 1e-8 * (1 + y.norm()));
    EXPECT_NEAR(u.lpNorm<1>(), ref->lpNorm<1>(), 1e-9 * (1 + ref->lpNorm<1>())) << "trial " << trial;

    // No feasible direction in the null space decreases the l1 norm.
    const Matrix null = Eigen::FullPivLU<Matrix>(G).kernel();
    for (Eigen::Index k = 0; k < null.cols(); ++k) {
      for (double eps : {1e-3, -1e-3}) {
        EXPECT_GE((u + eps * null.col(k)).lpNorm<1>(), u.lpNorm<1>() - 1e-10);
      }
    }
  }
}

TEST(L1, LiftedPlantsReachZero) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 3;
    const auto p = ncs::oracle::random_reachable(rng, d);
    const Vector xi = ncs::oracle::random_state(rng, d);
    const int horizon = d + 1 + trial % 6;
    const Vector u = ncs::l1_min_inputs(p, xi, horizon);
    const Vector x = ncs::oracle::forward(p.A(), p.b(), xi, u);
    EXPECT_LE(x.norm() / ncs::oracle::peak_norm(p.A(), p.b(), xi, u), 1e-6);
    const auto ref = ncs::oracle::l1_by_vertices(ncs::lifted_matrix(p, horizon), -ncs::propagate(p.A(), xi, horizon));
    ASSERT_TRUE(ref.has_value());
    EXPECT_NEAR(u.lpNorm<1>(), ref->lpNorm<1>(), 1e-7 * (1 + ref->lpNorm<1>()));
  }
}

double rip_by_singular_values(const Matrix& G, int order) {
  double delta = 0.0;
  const int n = static_cast<int>(G.cols());
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != order) continue;
    Matrix sub(G.rows(), order);
    int k = 0;
    for (int c = 0; c < n; ++c) {
      if (mask & (1u << c)) sub.col(k++) = G.col(c);
    }
    Vector sv = Eigen::JacobiSVD<Matrix>(sub).singularValues();
    const double lo = sub.rows() < order ? 0.0 : sv(sv.size() - 1) * sv(sv.size() - 1);
    delta = std::max({delta, sv(0) * sv(0) - 1.0, 1.0 - lo});
  }
  return delta;
}

TEST(Rip, KnownValues) {
  const auto a = ncs::rip_delta(mat({{1, 1}}), 2);
  EXPECT_NEAR(a.delta, 1.0, 1e-12);
  EXPECT_FALSE(a.certified);
  const auto b = ncs::rip_delta(std::sqrt(2.0) * Matrix::Identity(3, 3), 1);
  EXPECT_NEAR(b.delta, 1.0, 1e-12);
  const auto c = ncs::rip_delta(Matrix::Identity(4, 4), 2);
  EXPECT_NEAR(c.delta, 0.0, 1e-12);
  EXPECT_TRUE(c.certified);
}

TEST(Rip, MatchesSingularValueOracle) {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> N(0, 1);
  for (int trial = 0; trial < 30; ++trial) {
    const int rows = 3 + trial % 4, cols = 5 + trial % 4, order = 1 + trial % 3;
    Matrix G(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) G(r, c) = N(rng) / std::sqrt(rows);
    }
    EXPECT_NEAR(ncs::rip_delta(G, order).delta, rip_by_singular_values(G, order), 1e-10);
  }
}

TEST(Rip, Caps) {
  EXPECT_EQ(ncs::test::code_of([] { ncs::rip_delta(Matrix::Identity(50, 50), 4); }), ncs::ErrorCode::TooLarge);
  EXPECT_EQ(ncs::test::code_of([] { ncs::rip_delta(Matrix::Identity(3, 3), 4); }),
            ncs::ErrorCode::InvalidArgument);
}

TEST(Grouping, GreedyAgreesWithExhaustiveWhenItSucceeds) {
  std::mt19937_64 rng(54);
  std::uniform_int_distribution<int> T(0, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 4;
    const int capacity = 1 + trial % 2;
    std::vector<std::vector<int>> supports(n);
    std::vector<int> sparsity(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<int> s;
      for (int t = 0; t < 6; ++t) {
        if (T(rng) == 0) s.push_back(t);
      }
      if (s.empty()) s.push_back(T(rng));
      supports[i] = s;
      sparsity[i] = static_cast<int>(s.size());
    }
    const auto groups = ncs::group_by_capacity(sparsity, supports, capacity, 6);
    const bool exists = ncs::oracle::grouping_exists(supports, capacity);
    if (groups) {
      EXPECT_TRUE(exists);
      std::vector<int> seen(n, 0);
      for (const auto& g : *groups) {
        std::vector<int> used(6, 0);
        for (std::size_t i : g) {
          ++seen[i];
          for (int t : supports[i]) EXPECT_EQ(used[static_cast<std::size_t>(t)]++, 0);
        }
      }
      for (int c : seen) EXPECT_EQ(c, 1);
    }
    if (!exists) {
      EXPECT_FALSE(groups.has_value());
    }
  }
}

TEST(BruteForce, ScalarExamples) {
  const auto two = ncs::to_instance(ncs::test::scalar_file({2, 3}, {1, 1}, {1, 1}, 1, 2));
  const auto logic = ncs::l0_feasible_bruteforce(two);
  ASSERT_TRUE(logic.has_value());
  EXPECT_TRUE(ncs::verify_problem1(two, *logic).verified);

  const auto three = ncs::to_instance(ncs::test::scalar_file({2, 3, 4}, {1, 1, 1}, {1, -1, 2}, 1, 3));
  const auto l3 = ncs::l0_feasible_bruteforce(three);
  ASSERT_TRUE(l3.has_value());
  const auto sched = ncs::extract_schedule(*l3, 1);
  std::vector<std::size_t> order;
  for (const auto& s : sched.slots) {
    ASSERT_EQ(s.size(), 1u);
    order.push_back(s[0]);
  }
  std::sort(order.begin(), order.end());
  EXPECT_EQ(order, (std::vector<std::size_t>{0, 1, 2}));

  const auto short_horizon = ncs::to_instance(ncs::test::scalar_file({2, 3}, {1, 1}, {1, 1}, 1, 1));
  EXPECT_FALSE(ncs::l0_feasible_bruteforce(short_horizon).has_value());
}

TEST(BruteForce, Cap) {
  std::vector<double> a(10, 2.0), b(10, 1.0), x(10, 1.0);
  const auto inst = ncs::to_instance(ncs::test::scalar_file(a, b, x, 5, 10));
  EXPECT_EQ(ncs::test::code_of([&] { ncs::l0_feasible_bruteforce(inst); }), ncs::ErrorCode::TooLarge);
}

TEST(Sparsity, Measure) {
  EXPECT_EQ(ncs::measure_sparsity(vec({0, 1e-12, 3, -2}), 3.0), 2);
  EXPECT_EQ(ncs::support_of(vec({0, 1e-12, 3, -2}), 3.0), (std::vector<int>{2, 3}));
}

TEST(Relaxation, ClashingSupportsAreReported) {
  // Both plants put their single l1 input on the first step, so one slot cannot serve them.
  const auto inst = ncs::to_instance(ncs::test::scalar_file({2, 3}, {1, 1}, {1, 1}, 1, 4));
  const auto out = ncs::solve_via_relaxation(inst);
  EXPECT_EQ(out.solution.sparsity, (std::vector<int>{1, 1}));
  EXPECT_EQ(out.solution.supports[0], (std::vector<int>{0}));
  EXPECT_EQ(out.solution.supports[1], (std::vector<int>{0}));
  EXPECT_FALSE(out.logic.has_value());
  EXPECT_NE(out.failure.find("slot-disjoint"), std::string::npos);
}

TEST(Relaxation, DisjointSupportsVerify) {
  const auto inst = ncs::to_instance(ncs::test::scalar_file({2, 3, 0.5}, {1, 1, 1}, {1, 1, 1}, 2, 4));
  const auto out = ncs::solve_via_relaxation(inst);
  ASSERT_TRUE(out.logic.has_value());
  EXPECT_TRUE(out.verified);
  ASSERT_TRUE(out.rip[0].has_value());
  EXPECT_EQ(out.rip[0]->order, 2);
}

}  // namespace
