#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "shaperl/core.hpp"
#include "shaperl/gridworld.hpp"

using namespace shaperl;

TEST(DiscountedReturn, SingleTerm) {
  double r[] = {5.0};
  EXPECT_DOUBLE_EQ(discounted_return(r, 0.3), 5.0);
}

TEST(DiscountedReturn, GammaZeroRejectedGammaOneSums) {
  double r[] = {1.0, 1.0, 1.0};
  EXPECT_THROW(discounted_return(r, 0.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(discounted_return(r, 1.0), 3.0);
}

TEST(DiscountedReturn, GeometricWeights) {
  double r[] = {1.0, 2.0, 4.0};
  EXPECT_DOUBLE_EQ(discounted_return(r, 0.5), 3.0);
}

TEST(DiscountedReturn, NonFiniteRewardRejected) {
  double r[] = {1.0, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(discounted_return(r, 0.9), std::invalid_argument);
  double nan_r[] = {std::nan("")};
  EXPECT_THROW(discounted_return(nan_r, 0.9), std::invalid_argument);
}

TEST(DiscountedReturn, Linearity) {
  RngStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + rng.uniform_int(20);
    double gamma = rng.uniform(0.05, 1.0);
    double c = rng.uniform(-3.0, 3.0);
    std::vector<double> r(n), scaled(n);
    for (int i = 0; i < n; ++i) {
      r[i] = rng.uniform(-10.0, 10.0);
      scaled[i] = c * r[i];
    }
    EXPECT_NEAR(discounted_return(scaled, gamma), c * discounted_return(r, gamma), 1e-9);
  }
}

TEST(Trajectory, TerminalMustBeLast) {
  Trajectory traj(0.9);
  Experience e;
  e.s = Observation::discrete(0);
  e.a = ActionValue::discrete(0);
  e.r = 1.0;
  e.s_next = Observation::discrete(1);
  e.terminal = false;
  traj.append(e);
  e.terminal = true;
  traj.append(e);
  EXPECT_THROW(traj.append(e), std::invalid_argument);
  EXPECT_EQ(traj.size(), 2u);
}

TEST(Trajectory, TotalReturnMatchesDiscountedReturn) {
  Trajectory traj(0.5);
  for (int i = 0; i < 3; ++i) {
    Experience e;
    e.s = Observation::discrete(i);
    e.a = ActionValue::discrete(0);
    e.r = double(1 << i);  // 1, 2, 4
    e.s_next = Observation::discrete(i + 1);
    traj.append(e);
  }
  EXPECT_DOUBLE_EQ(traj.total_return(), 3.0);
}

TEST(RngStream, SameKeySameSequence) {
  RngStream a = RngStream::derive(42, {1, 2});
  RngStream b = RngStream::derive(42, {1, 2});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, DifferentPathsDiverge) {
  RngStream a = RngStream::derive(42, {1, 2});
  RngStream b = RngStream::derive(42, {1, 3});
  RngStream c = RngStream::derive(43, {1, 2});
  int same_ab = 0, same_ac = 0;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t x = a.next_u64();
    same_ab += x == b.next_u64() ? 1 : 0;
    same_ac += x == c.next_u64() ? 1 : 0;
  }
  EXPECT_EQ(same_ab, 0);
  EXPECT_EQ(same_ac, 0);
}

TEST(RngStream, UniformAndCategoricalRanges) {
  RngStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    int k = rng.uniform_int(5);
    EXPECT_GE(k, 0);
    EXPECT_LT(k, 5);
  }
  std::vector<double> probs{0.0, 0.0, 1.0};
  for (int i = 0; i < 32; ++i) EXPECT_EQ(rng.categorical(probs), 2);
}

TEST(RngStream, NormalMomentsRoughlyStandard) {
  RngStream rng(12);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.03);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  double row[] = {0.1, -2.0, 3.5, 0.0};
  auto p = softmax(row);
  double total = 0.0;
  for (double x : p) total += x;
  EXPECT_NEAR(total, 1.0, 1e-12);
  double shifted[] = {100.1, 98.0, 103.5, 100.0};
  auto q = softmax(shifted);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
}

TEST(LogSumExp, MatchesDirectComputationAndBounds) {
  double row[] = {-1.0, 2.0, 0.5};
  double direct = std::log(std::exp(-1.0) + std::exp(2.0) + std::exp(0.5));
  EXPECT_NEAR(log_sum_exp(row), direct, 1e-12);
  double big[] = {1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-9);
}

TEST(ArgmaxLowest, TieBreaksToLowestIndex) {
  double row[] = {1.0, 3.0, 3.0, 2.0};
  EXPECT_EQ(argmax_lowest(row), 1);
}

TEST(EnvReset, GridworldStartsAtOrigin) {
  PuddleJumpGrid env;
  RngStream rng(0);
  Observation obs = env_reset(env, rng);
  EXPECT_EQ(obs.id, grid_observe({0, 0}, env.config()));
}

TEST(EnvReset, SameSeedSameObservation) {
  PuddleJumpGrid env;
  RngStream a = RngStream::derive(5, {0});
  RngStream b = RngStream::derive(5, {0});
  EXPECT_EQ(env.reset(a).id, env.reset(b).id);
}
