#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shaperl/rng.hpp"

namespace shaperl {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// What the agent sees: a discrete index (id >= 0) or a point in a continuous
// box (coords). Exactly one is meaningful for a given environment.
struct Observation {
  int id = -1;
  std::vector<double> coords;

  static Observation discrete(int id) {
    require(id >= 0, "Observation: discrete id must be non-negative");
    Observation o;
    o.id = id;
    return o;
  }

  static Observation continuous(std::vector<double> coords) {
    Observation o;
    o.coords = std::move(coords);
    return o;
  }

  bool is_discrete() const { return id >= 0; }
};

struct ActionValue {
  int index = -1;
  double scalar = 0.0;

  static ActionValue discrete(int index) {
    require(index >= 0, "ActionValue: discrete index must be non-negative");
    ActionValue a;
    a.index = index;
    return a;
  }

  static ActionValue continuous(double scalar) {
    require(std::isfinite(scalar), "ActionValue: scalar must be finite");
    ActionValue a;
    a.scalar = scalar;
    return a;
  }

  bool is_discrete() const { return index >= 0; }
};

struct StepOutcome {
  Observation s_next;
  double reward = 0.0;
  bool terminal = false;
};

// One interaction tuple (s, a, r, s'), the unit of learning.
struct Experience {
  Observation s;
  ActionValue a;
  double r = 0.0;
  Observation s_next;
  bool terminal = false;
};

// Per-episode metrics row; the harness serializes these to CSV.
struct RunRecord {
  int episode = 0;
  std::uint64_t seed = 0;
  std::string scheme;
  double ret = 0.0;
  int steps = 0;
  bool success = false;
};

inline double discounted_return(std::span<const double> rewards, double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, "discounted_return: gamma must be in (0, 1]");
  double total = 0.0;
  double factor = 1.0;
  for (double r : rewards) {
    require(std::isfinite(r), "discounted_return: rewards must be finite");
    total += factor * r;
    factor *= gamma;
  }
  return total;
}

// Ordered experience steps; at most one terminal step and it is last.
class Trajectory {
 public:
  explicit Trajectory(double gamma = 1.0) : gamma_(gamma) {
    require(gamma > 0.0 && gamma <= 1.0, "Trajectory: gamma must be in (0, 1]");
  }

  void append(Experience e) {
    require(steps_.empty() || !steps_.back().terminal,
            "Trajectory: cannot append past a terminal step");
    steps_.push_back(std::move(e));
  }

  const std::vector<Experience>& steps() const { return steps_; }
  double gamma() const { return gamma_; }
  bool empty() const { return steps_.empty(); }
  std::size_t size() const { return steps_.size(); }

  double total_return() const {
    std::vector<double> rewards;
    rewards.reserve(steps_.size());
    for (const auto& e : steps_) rewards.push_back(e.r);
    return discounted_return(rewards, gamma_);
  }

 private:
  std::vector<Experience> steps_;
  double gamma_;
};

// ---- small numeric helpers shared by the value and policy modules ----

inline double log_sum_exp(std::span<const double> xs) {
  double m = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

inline std::vector<double> softmax(std::span<const double> xs) {
  double m = *std::max_element(xs.begin(), xs.end());
  std::vector<double> out(xs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out[i] = std::exp(xs[i] - m);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

// Lowest index wins ties.
inline int argmax_lowest(std::span<const double> xs) {
  int best = 0;
  for (int i = 1; i < int(xs.size()); ++i) {
    if (xs[i] > xs[best]) best = i;
  }
  return best;
}

// Environment interface every agent consumes. Discrete environments report
// observation_count/action_count; continuous ones report observation_dim and
// action_bounds. Instances carry no shared state, one instance per run.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual bool discrete() const = 0;
  virtual int observation_count() const { return 0; }
  virtual int action_count() const { return 0; }
  virtual int observation_dim() const { return 0; }
  virtual std::pair<double, double> action_bounds() const { return {0.0, 0.0}; }
  virtual int max_steps() const = 0;

  virtual Observation reset(RngStream& rng) = 0;
  virtual StepOutcome step(const ActionValue& a, RngStream& rng) = 0;
};

inline Observation env_reset(Environment& env, RngStream& rng) { return env.reset(rng); }

}  // namespace shaperl
