#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using ncs::Matrix;
using ncs::PlantDynamics;
using ncs::Vector;
using ncs::test::mat;
using ncs::test::vec;

double relative_terminal(const PlantDynamics& p, const Vector& xi, const Vector& u) {
  const Vector x = ncs::oracle::forward(p.A(), p.b(), xi, u);
  return x.norm() / ncs::oracle::peak_norm(p.A(), p.b(), xi, u);
}

TEST(Deadbeat, DoubleIntegrator) {
  const PlantDynamics p(mat({{1, 1}, {0, 1}}), vec({0, 1}));
  const Vector u = ncs::deadbeat_inputs(p, vec({1, 0}), 3);
  EXPECT_LE((u - vec({0, -1, 1})).norm(), 1e-12);
  EXPECT_LE(ncs::oracle::forward(p.A(), p.b(), vec({1, 0}), u).norm(), 1e-12);
}

TEST(Deadbeat, ScalarPlant) {
  const PlantDynamics p(mat({{2}}), vec({1}));
  EXPECT_LE((ncs::deadbeat_inputs(p, vec({1}), 2) - vec({0, -4})).norm(), 1e-12);
}

TEST(Deadbeat, WindowTooShortOrUnreachable) {
  const PlantDynamics p(mat({{1, 1}, {0, 1}}), vec({0, 1}));
  EXPECT_EQ(ncs::test::code_of([&] { ncs::deadbeat_inputs(p, vec({1, 0}), 2); }),
            ncs::ErrorCode::InvalidArgument);
  const PlantDynamics q(mat({{1, 0}, {0, 1}}), vec({1, 0}));
  EXPECT_EQ(ncs::test::code_of([&] { ncs::deadbeat_inputs(q, vec({1, 0}), 3); }),
            ncs::ErrorCode::NotReachable);
}

TEST(Windowed, PlacesWindowAtOffset) {
  const PlantDynamics s(mat({{2}}), vec({1}));
  EXPECT_LE((ncs::windowed_inputs(s, vec({1}), 1, 2, 4) - vec({0, 0, -8, 0})).norm(), 1e-12);
  const PlantDynamics p(mat({{1, 1}, {0, 1}}), vec({0, 1}));
  const Vector u = ncs::windowed_inputs(p, vec({1, 0}), 2, 3, 5);
  EXPECT_LE((u - vec({0, 0, 0, -1, 1})).norm(), 1e-12);
}

TEST(Windowed, OverflowIsReported) {
  const PlantDynamics s(mat({{2}}), vec({1}));
  EXPECT_EQ(ncs::test::code_of([&] { ncs::windowed_inputs(s, vec({1}), 3, 2, 4); }),
            ncs::ErrorCode::WindowOverflow);
}

TEST(Deadbeat, RandomPlantsReachZero) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + trial % 4;
    const PlantDynamics p = ncs::oracle::random_reachable(rng, d);
    const Vector xi = ncs::oracle::random_state(rng, d);
    const int d_hat = d + 1 + trial % 3;
    const int d_tilde = trial % 4;
    const int horizon = d_tilde + d_hat + trial % 2;
    const Vector u = ncs::windowed_inputs(p, xi, d_tilde, d_hat, horizon);
    ASSERT_EQ(u.size(), horizon);
    for (int t = 0; t < d_tilde; ++t) EXPECT_EQ(u(t), 0.0);
    for (int t = d_tilde + d_hat; t < horizon; ++t) EXPECT_EQ(u(t), 0.0);
    EXPECT_LE(relative_terminal(p, xi, u), 1e-6) << "trial " << trial;
  }
}

TEST(Deadbeat, SolvesLiftedSystem) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 3;
    const PlantDynamics p = ncs::oracle::random_reachable(rng, d);
    const Vector xi = ncs::oracle::random_state(rng, d);
    const int d_hat = d + 1 + trial % 2;
    const Vector u = ncs::deadbeat_inputs(p, xi, d_hat);
    const Vector target = -ncs::oracle::power_by_squaring(p.A(), d_hat) * xi;
    EXPECT_LE((ncs::lifted_matrix(p, d_hat) * u - target).norm(), 1e-8 * (1 + target.norm()));
    for (int t = 0; t < d_hat - d; ++t) EXPECT_EQ(u(t), 0.0);
  }
}

}  // namespace
