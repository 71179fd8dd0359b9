#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"

namespace {

using ncs::ControlLogic;
using ncs::Matrix;
using ncs::Vector;
using ncs::test::mat;
using ncs::test::vec;

ncs::NcsInstance scalar_pair(int horizon) {
  return ncs::to_instance(ncs::test::scalar_file({2, 3}, {1, 1}, {1, 1}, 1, horizon));
}

TEST(Simulate, ScalarTrajectory) {
  const auto inst = scalar_pair(2);
  ControlLogic logic(Matrix::Zero(2, 2));
  logic.u(0, 1) = -4;
  const auto res = ncs::simulate(inst, logic);
  ASSERT_EQ(res.trajectories[0].size(), 3u);
  EXPECT_EQ(res.trajectories[0][1](0), 2.0);
  EXPECT_EQ(res.trajectories[0][2](0), 0.0);
  EXPECT_EQ(res.terminal_residuals[0], 0.0);
  EXPECT_NEAR(res.terminal_residuals[1], 1.0, 1e-15);
  EXPECT_FALSE(res.verified);
  EXPECT_EQ(res.max_column_occupancy, 1u);
}

TEST(Simulate, CapacityViolationIsReported) {
  const auto inst = scalar_pair(2);
  ControlLogic logic(mat({{0, -4}, {0, -9}}));
  const auto res = ncs::verify_problem1(inst, logic);
  EXPECT_FALSE(res.verified);
  EXPECT_EQ(res.max_column_occupancy, 2u);
  ASSERT_FALSE(res.issues.empty());
  EXPECT_NE(res.issues.back().find("CapacityViolation: step 2"), std::string::npos);
}

TEST(Simulate, DimensionMismatch) {
  const auto inst = scalar_pair(2);
  EXPECT_EQ(ncs::test::code_of([&] { ncs::simulate(inst, ControlLogic(Matrix::Zero(2, 3))); }),
            ncs::ErrorCode::InvalidArgument);
}

TEST(Simulate, MatchesForwardOracleOnRandomLogic) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ncs::PlantDynamics> plants;
    std::vector<Vector> xi;
    for (int i = 0; i < 3; ++i) {
      plants.push_back(ncs::oracle::random_reachable(rng, 1 + (trial + i) % 3, 1.0));
      xi.push_back(ncs::oracle::random_state(rng, plants.back().dim()));
    }
    const ncs::NcsInstance inst(plants, xi, 2, 5);
    Matrix u(3, 5);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 5; ++c) u(r, c) = U(rng);
    }
    const auto res = ncs::simulate(inst, ControlLogic(u));
    for (int i = 0; i < 3; ++i) {
      const Vector x = ncs::oracle::forward(plants[i].A(), plants[i].b(), xi[i], u.row(i).transpose());
      EXPECT_LE((res.trajectories[i].back() - x).norm(), 1e-12 * (1 + x.norm()));
    }
  }
}

TEST(Schedule, ThresholdAndCapacity) {
  ControlLogic logic(mat({{1e-12, 3, 0}, {0, 2, 5}}));
  const auto s = ncs::active_sets(logic);
  ASSERT_EQ(s.slots.size(), 3u);
  EXPECT_TRUE(s.slots[0].empty());
  EXPECT_EQ(s.slots[1], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(s.slots[2], (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.max_occupancy(), 2u);
  EXPECT_EQ(ncs::test::code_of([&] { ncs::extract_schedule(logic, 1); }), ncs::ErrorCode::CapacityViolation);
  EXPECT_NO_THROW(ncs::extract_schedule(logic, 2));
}

TEST(Schedule, ExtractionIsIdempotent) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix u(4, 6);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 6; ++c) u(r, c) = U(rng) < 0 ? 0.0 : U(rng) * std::pow(10.0, -14 * (trial % 2));
    }
    const ControlLogic logic(u);
    const ControlLogic once = ncs::zero_small_inputs(logic);
    EXPECT_EQ(ncs::zero_small_inputs(once), once);
    EXPECT_EQ(ncs::active_sets(once), ncs::active_sets(logic));
  }
}

}  // namespace
