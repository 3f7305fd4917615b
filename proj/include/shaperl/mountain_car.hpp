#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include "shaperl/core.hpp"

namespace shaperl {

struct CarState {
  double p = -0.5;
  double v = 0.0;
};

// Continuous mountain car: an underpowered car in a valley that must pump
// momentum to reach the goal on the right hill. Reward is -a^2 per step plus
// goal_reward on arrival, so idling at the bottom is a sub-optimal attractor.
struct CarConfig {
  double position_min = -1.2;
  double position_max = 0.6;
  double velocity_min = -0.07;
  double velocity_max = 0.07;
  double goal_position = 0.45;
  double force_coeff = 0.0015;
  double gravity_coeff = 0.0025;
  double goal_reward = 100.0;
  int max_steps = 999;
  bool uniform_start = false;  // p ~ U[-0.6, -0.4], v = 0; otherwise fixed (-0.5, 0)

  void validate() const {
    require(goal_position <= position_max, "CarConfig: goal_position must be <= position_max");
    require(max_steps >= 1, "CarConfig: max_steps must be >= 1");
  }
};

struct CarTransition {
  CarState next;
  double reward = 0.0;
  bool terminal = false;
};

inline CarTransition car_step(CarState s, const ActionValue& a, const CarConfig& cfg) {
  require(std::isfinite(a.scalar), "car_step: action must be finite");
  double u = std::clamp(a.scalar, -1.0, 1.0);
  double v = s.v + u * cfg.force_coeff - std::cos(3.0 * s.p) * cfg.gravity_coeff;
  v = std::clamp(v, cfg.velocity_min, cfg.velocity_max);
  double p = std::clamp(s.p + v, cfg.position_min, cfg.position_max);
  if (p <= cfg.position_min) v = 0.0;
  bool terminal = p >= cfg.goal_position;
  double reward = -u * u + (terminal ? cfg.goal_reward : 0.0);
  return {{p, v}, reward, terminal};
}

class MountainCar final : public Environment {
 public:
  explicit MountainCar(CarConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  bool discrete() const override { return false; }
  int observation_dim() const override { return 2; }
  std::pair<double, double> action_bounds() const override { return {-1.0, 1.0}; }
  int max_steps() const override { return cfg_.max_steps; }

  Observation reset(RngStream& rng) override {
    state_ = CarState{-0.5, 0.0};
    if (cfg_.uniform_start) state_.p = rng.uniform(-0.6, -0.4);
    done_ = false;
    return observe();
  }

  StepOutcome step(const ActionValue& a, RngStream&) override {
    require(!done_, "MountainCar: step after terminal state; reset first");
    CarTransition tr = car_step(state_, a, cfg_);
    state_ = tr.next;
    done_ = tr.terminal;
    return {observe(), tr.reward, tr.terminal};
  }

  const CarConfig& config() const { return cfg_; }
  CarState state() const { return state_; }

 private:
  Observation observe() const { return Observation::continuous({state_.p, state_.v}); }

  CarConfig cfg_;
  CarState state_{};
  bool done_ = false;
};

}  // namespace shaperl
