#include <gtest/gtest.h>

#include <cmath>

#include "shaperl/shaping.hpp"

using namespace shaperl;

namespace {

const GridConfig kGrid;

PotentialScheme table_pbrs(std::vector<double> phi) {
  PotentialScheme s;
  s.mode = ShapingMode::pbrs;
  s.phi_s = [phi = std::move(phi)](const Observation& o) { return phi.at(o.id); };
  return s;
}

PotentialScheme table_pba(ShapingMode mode, std::vector<double> phi, int n_actions) {
  PotentialScheme s;
  s.mode = mode;
  s.phi_sa = [phi = std::move(phi), n_actions](const Observation& o, const ActionValue& a) {
    return phi.at(std::size_t(o.id) * n_actions + a.index);
  };
  return s;
}

}  // namespace

TEST(PbrsBonus, ConstantPotentialTelescopesToZeroAtGammaOne) {
  auto scheme = table_pbrs({3.0, 3.0});
  EXPECT_DOUBLE_EQ(
      pbrs_bonus(scheme, Observation::discrete(0), Observation::discrete(1), false, 1.0), 0.0);
}

TEST(PbrsBonus, DirectFormula) {
  auto scheme = table_pbrs({1.0, 2.0});
  EXPECT_NEAR(pbrs_bonus(scheme, Observation::discrete(0), Observation::discrete(1), false, 0.99),
              0.98, 1e-12);
}

TEST(PbrsBonus, TerminalPotentialZeroed) {
  auto scheme = table_pbrs({1.0, 2.0});
  EXPECT_DOUBLE_EQ(
      pbrs_bonus(scheme, Observation::discrete(0), Observation::discrete(1), true, 0.9), -1.0);
  scheme.terminal_potential_zero = false;
  EXPECT_NEAR(pbrs_bonus(scheme, Observation::discrete(0), Observation::discrete(1), true, 0.9),
              0.9 * 2.0 - 1.0, 1e-12);
}

TEST(PbrsBonus, WrongModeRejected) {
  auto scheme = table_pba(ShapingMode::look_ahead_pba, {0.0}, 1);
  EXPECT_THROW(pbrs_bonus(scheme, Observation::discrete(0), Observation::discrete(0), false, 1.0),
               std::invalid_argument);
}

TEST(PbrsBonus, TrajectoryTelescoping) {
  RngStream rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> phi(8);
    for (double& x : phi) x = rng.uniform(-10.0, 10.0);
    auto scheme = table_pbrs(phi);
    double gamma = (trial % 3 == 0) ? 1.0 : rng.uniform(0.2, 1.0);
    int steps = 1 + rng.uniform_int(30);
    std::vector<int> states(steps + 1);
    for (int& s : states) s = rng.uniform_int(8);
    double total = 0.0, factor = 1.0;
    for (int t = 0; t < steps; ++t) {
      total += factor * pbrs_bonus(scheme, Observation::discrete(states[t]),
                                   Observation::discrete(states[t + 1]), false, gamma);
      factor *= gamma;
    }
    EXPECT_NEAR(total, factor * phi[states[steps]] - phi[states[0]], 1e-9);
  }
}

TEST(LookAheadBonus, ConstantPotentialAtGammaOne) {
  auto scheme = table_pba(ShapingMode::look_ahead_pba, {4.0, 4.0}, 1);
  EXPECT_DOUBLE_EQ(look_ahead_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                                    Observation::discrete(1), ActionValue::discrete(0), false, 1.0),
                   0.0);
}

TEST(LookAheadBonus, DirectFormula) {
  auto scheme = table_pba(ShapingMode::look_ahead_pba, {3.0, 5.0}, 1);
  EXPECT_DOUBLE_EQ(look_ahead_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                                    Observation::discrete(1), ActionValue::discrete(0), false, 0.5),
                   -0.5);
}

TEST(LookAheadBonus, TerminalNextPotentialZero) {
  auto scheme = table_pba(ShapingMode::look_ahead_pba, {3.0, 5.0}, 1);
  EXPECT_DOUBLE_EQ(look_ahead_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                                    Observation::discrete(1), std::nullopt, true, 0.99),
                   -3.0);
}

TEST(LookAheadBonus, MissingNextActionRejected) {
  auto scheme = table_pba(ShapingMode::look_ahead_pba, {3.0, 5.0}, 1);
  EXPECT_THROW(look_ahead_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                                Observation::discrete(1), std::nullopt, false, 0.99),
               std::invalid_argument);
}

TEST(LookBackBonus, ConstantPotentialAtGammaOne) {
  auto scheme = table_pba(ShapingMode::look_back_pba, {2.0, 2.0}, 1);
  EXPECT_DOUBLE_EQ(look_back_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                                   Observation::discrete(1), ActionValue::discrete(0), false, 1.0),
                   0.0);
}

TEST(LookBackBonus, InverseGammaWeight) {
  auto scheme = table_pba(ShapingMode::look_back_pba, {2.0, 1.0}, 1);
  // phi(s,a)=2, phi(prev)=1, gamma=0.5 -> 2 - 1/0.5 = 0
  EXPECT_DOUBLE_EQ(look_back_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                                   Observation::discrete(1), ActionValue::discrete(0), false, 0.5),
                   0.0);
}

TEST(LookBackBonus, FirstStepDropsPrevTerm) {
  auto scheme = table_pba(ShapingMode::look_back_pba, {4.0, 0.0}, 1);
  EXPECT_DOUBLE_EQ(look_back_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                                   Observation::discrete(1), ActionValue::discrete(0), true, 0.7),
                   4.0);
}

TEST(LookBackBonus, GammaZeroRejected) {
  auto scheme = table_pba(ShapingMode::look_back_pba, {4.0, 0.0}, 1);
  EXPECT_THROW(look_back_bonus(scheme, Observation::discrete(0), ActionValue::discrete(0),
                               Observation::discrete(1), ActionValue::discrete(0), false, 0.0),
               std::invalid_argument);
}

TEST(LookBackBonus, EpisodicSumBruteForceOnThreeSteps) {
  // sum_t gamma^t F_t collapses to gamma^(T-1) * phi(s_{T-1}, a_{T-1})
  RngStream rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    const int n_sa = 6;
    std::vector<double> phi(n_sa);
    for (double& x : phi) x = rng.uniform(-5.0, 5.0);
    auto scheme = table_pba(ShapingMode::look_back_pba, phi, 1);
    double gamma = rng.uniform(0.3, 1.0);
    int states[3] = {rng.uniform_int(n_sa), rng.uniform_int(n_sa), rng.uniform_int(n_sa)};
    double total = 0.0, factor = 1.0;
    for (int t = 0; t < 3; ++t) {
      Observation cur = Observation::discrete(states[t]);
      Observation prev = Observation::discrete(states[t > 0 ? t - 1 : 0]);
      total += factor * look_back_bonus(scheme, cur, ActionValue::discrete(0), prev,
                                        ActionValue::discrete(0), t == 0, gamma);
      factor *= gamma;
    }
    EXPECT_NEAR(total, gamma * gamma * phi[states[2]], 1e-10);
  }
}

TEST(GridPbrsPotential, RowAssignment) {
  EXPECT_DOUBLE_EQ(grid_pbrs_potential({3, 0}, 0.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(grid_pbrs_potential({3, 1}, 0.0, 5.0), 0.0);
  EXPECT_DOUBLE_EQ(grid_pbrs_potential({3, 9}, 0.0, 5.0), 5.0);
  EXPECT_DOUBLE_EQ(grid_pbrs_potential({3, 4}, 0.0, 5.0), 5.0);
}

TEST(GridPbrsPotential, EqualLevelsRejected) {
  EXPECT_THROW(grid_pbrs_potential({0, 0}, 1.0, 1.0), std::invalid_argument);
}

TEST(GridPbaPotential, UniformMeanEqualsPbrsAtEveryState) {
  for (int y = 0; y < 10; ++y) {
    for (int x = 0; x < 10; ++x) {
      double mean = 0.0;
      for (int a = 0; a < kGridActionCount; ++a) {
        mean += grid_pba_potential({x, y}, GridAction(a), 0.0, 5.0, 5.0, kGrid);
      }
      mean /= kGridActionCount;
      EXPECT_NEAR(mean, grid_pbrs_potential({x, y}, 0.0, 5.0), 1e-12);
    }
  }
}

TEST(GridPbaPotential, TwoReducingActionsGetPointSixKappa) {
  // interior cell away from walls and puddle: up and right reduce distance,
  // down/left increase it, jump is a no-op
  GridState s{4, 5};
  int reducing = 0;
  for (int a = 0; a < kGridActionCount; ++a) reducing += grid_advice_flag(s, GridAction(a), kGrid);
  ASSERT_EQ(reducing, 2);
  double kappa = 5.0;
  double advised = grid_pba_potential(s, GridAction::up, 0.0, 5.0, kappa, kGrid);
  EXPECT_NEAR(advised, grid_pbrs_potential(s, 0.0, 5.0) + 0.6 * kappa, 1e-12);
}

TEST(GridPbaPotential, GoalAdjacentUpIsAdvised) {
  EXPECT_EQ(grid_advice_flag({9, 8}, GridAction::up, kGrid), 1);
}

TEST(GridPbaPotential, JumpJudgedByItsSuccessCell) {
  EXPECT_EQ(grid_advice_flag({4, 1}, GridAction::jump, kGrid), 1);   // crossing helps
  EXPECT_EQ(grid_advice_flag({4, 3}, GridAction::jump, kGrid), 0);   // jumping back hurts
  EXPECT_EQ(grid_advice_flag({4, 6}, GridAction::jump, kGrid), 0);   // no-op elsewhere
}

TEST(CarPbrsPotential, AffineInPosition) {
  EXPECT_DOUBLE_EQ(car_pbrs_potential({-1.2, 0.0}), 0.8);
  EXPECT_DOUBLE_EQ(car_pbrs_potential({0.45, 0.0}), 2.45);
  EXPECT_LT(car_pbrs_potential({-0.9, 0.0}), car_pbrs_potential({-0.2, 0.0}));
}

TEST(CarPbaPotential, RewardsVelocityAlignedActions) {
  EXPECT_DOUBLE_EQ(car_pba_potential({-0.5, 0.01}, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(car_pba_potential({-0.5, 0.01}, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(car_pba_potential({-0.5, 0.02}, -0.3), 0.0);
}

TEST(PotentialScheme, GridSchemeFiniteOnAllObservationActionPairs) {
  for (ShapingMode mode :
       {ShapingMode::pbrs, ShapingMode::look_ahead_pba, ShapingMode::look_back_pba}) {
    PotentialScheme scheme = grid_potential_scheme(mode, 0.0, 5.0, 5.0, kGrid);
    for (int o = 0; o < grid_observation_count(kGrid); ++o) {
      if (mode == ShapingMode::pbrs) {
        EXPECT_TRUE(std::isfinite(scheme.state_potential(Observation::discrete(o))));
      } else {
        for (int a = 0; a < kGridActionCount; ++a) {
          EXPECT_TRUE(std::isfinite(
              scheme.action_potential(Observation::discrete(o), ActionValue::discrete(a))));
        }
      }
    }
  }
}

TEST(PotentialScheme, CarSchemeFiniteUnderFuzz) {
  PotentialScheme pbrs = car_potential_scheme(ShapingMode::pbrs);
  PotentialScheme pba = car_potential_scheme(ShapingMode::look_back_pba);
  RngStream rng(8);
  for (int i = 0; i < 1000; ++i) {
    Observation s = Observation::continuous({rng.uniform(-1.2, 0.6), rng.uniform(-0.07, 0.07)});
    EXPECT_TRUE(std::isfinite(pbrs.state_potential(s)));
    EXPECT_TRUE(
        std::isfinite(pba.action_potential(s, ActionValue::continuous(rng.uniform(-1.0, 1.0)))));
  }
}

TEST(PotentialScheme, MissingFieldRejected) {
  PotentialScheme scheme;  // mode none, nothing populated
  EXPECT_THROW(scheme.state_potential(Observation::discrete(0)), std::invalid_argument);
  EXPECT_THROW(scheme.action_potential(Observation::discrete(0), ActionValue::discrete(0)),
               std::invalid_argument);
}

TEST(PotentialScheme, AliasedObservationTakesCellMean) {
  PotentialScheme scheme =
      grid_potential_scheme(ShapingMode::look_back_pba, 0.0, 5.0, 5.0, kGrid);
  int aliased = grid_observe({9, 8}, kGrid);
  for (int a = 0; a < kGridActionCount; ++a) {
    double expected = 0.5 * (grid_pba_potential({9, 8}, GridAction(a), 0.0, 5.0, 5.0, kGrid) +
                             grid_pba_potential({8, 9}, GridAction(a), 0.0, 5.0, 5.0, kGrid));
    EXPECT_NEAR(
        scheme.action_potential(Observation::discrete(aliased), ActionValue::discrete(a)),
        expected, 1e-12);
  }
}
