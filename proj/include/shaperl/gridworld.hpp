#pragma once

#include <utility>
#include <vector>

#include "shaperl/core.hpp"

namespace shaperl {

struct GridState {
  int x = 0;
  int y = 0;
  bool operator==(const GridState&) const = default;
};

enum class GridAction : int { up = 0, down = 1, left = 2, right = 3, jump = 4 };
inline constexpr int kGridActionCount = 5;

// Puddle-jump gridworld: a size x size grid with an impassable puddle row
// that can only be crossed by the stochastic jump action, and with the two
// goal-adjacent cells aliased to a single observation.
struct GridConfig {
  int size = 10;
  double p_jump = 0.2;
  double step_reward = -0.05;
  double goal_reward = 1000.0;
  int max_steps = 1000;
  int puddle_row = 2;
  GridState start{0, 0};
  GridState goal{9, 9};

  void validate() const {
    require(size >= 4, "GridConfig: size must be at least 4");
    require(p_jump >= 0.0 && p_jump <= 1.0, "GridConfig: p_jump must be in [0, 1]");
    require(max_steps >= 1, "GridConfig: max_steps must be >= 1");
  }
};

struct GridTransition {
  GridState next;
  double reward = 0.0;
  bool terminal = false;
};

inline bool grid_in_bounds(GridState s, const GridConfig& cfg) {
  return s.x >= 0 && s.x < cfg.size && s.y >= 0 && s.y < cfg.size;
}

// Deterministic successor of a move action. Moves that leave the grid or
// enter the puddle row keep the state unchanged.
inline GridState grid_move(GridState s, GridAction a, const GridConfig& cfg) {
  GridState n = s;
  switch (a) {
    case GridAction::up: n.y += 1; break;
    case GridAction::down: n.y -= 1; break;
    case GridAction::left: n.x -= 1; break;
    case GridAction::right: n.x += 1; break;
    default: return s;
  }
  if (!grid_in_bounds(n, cfg) || n.y == cfg.puddle_row) return s;
  return n;
}

inline bool grid_jump_applies(GridState s, const GridConfig& cfg) {
  return s.y == cfg.puddle_row - 1 || s.y == cfg.puddle_row + 1;
}

// Landing cell of a successful jump: same x, row mirrored across the puddle.
inline GridState grid_jump_target(GridState s, const GridConfig& cfg) {
  if (!grid_jump_applies(s, cfg)) return s;
  return GridState{s.x, 2 * cfg.puddle_row - s.y};
}

inline GridTransition grid_step(GridState s, const ActionValue& a, RngStream& rng,
                                const GridConfig& cfg) {
  require(a.index >= 0 && a.index < kGridActionCount,
          "grid_step: action index must be in [0, 5)");
  auto action = GridAction(a.index);
  GridState next = s;
  if (action == GridAction::jump) {
    if (grid_jump_applies(s, cfg) && rng.uniform() < cfg.p_jump) {
      next = grid_jump_target(s, cfg);
    }
  } else {
    next = grid_move(s, action, cfg);
  }
  bool terminal = next == cfg.goal;
  double reward = cfg.step_reward + (terminal ? cfg.goal_reward : 0.0);
  return {next, reward, terminal};
}

// Probability-weighted successors of (s, a); the rng-marginalized transition
// row used by the oracle export and the stochastic-matrix property test.
inline std::vector<std::pair<GridState, double>> grid_transition_dist(GridState s, GridAction a,
                                                                      const GridConfig& cfg) {
  if (a == GridAction::jump && grid_jump_applies(s, cfg) && cfg.p_jump > 0.0) {
    GridState target = grid_jump_target(s, cfg);
    if (cfg.p_jump >= 1.0) return {{target, 1.0}};
    return {{target, cfg.p_jump}, {s, 1.0 - cfg.p_jump}};
  }
  if (a == GridAction::jump) return {{s, 1.0}};
  return {{grid_move(s, a, cfg), 1.0}};
}

// Observation map: injective on all cells except (size-1, size-2) and
// (size-2, size-1), which share one id; the goal takes the freed slot so ids
// stay contiguous in [0, size^2 - 1).
inline int grid_observe(GridState s, const GridConfig& cfg) {
  require(grid_in_bounds(s, cfg), "grid_observe: state out of bounds");
  const int n = cfg.size;
  const GridState aliased_a{n - 1, n - 2};
  const GridState aliased_b{n - 2, n - 1};
  if (s == aliased_b) return aliased_a.y * n + aliased_a.x;
  if (s == cfg.goal) return n * n - 2;
  return s.y * n + s.x;
}

inline int grid_observation_count(const GridConfig& cfg) { return cfg.size * cfg.size - 1; }

// Cells mapping to each observation id (the aliased id owns two cells).
inline std::vector<std::vector<GridState>> grid_observation_cells(const GridConfig& cfg) {
  std::vector<std::vector<GridState>> cells(grid_observation_count(cfg));
  for (int y = 0; y < cfg.size; ++y) {
    for (int x = 0; x < cfg.size; ++x) {
      GridState s{x, y};
      cells[grid_observe(s, cfg)].push_back(s);
    }
  }
  return cells;
}

class PuddleJumpGrid final : public Environment {
 public:
  explicit PuddleJumpGrid(GridConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  bool discrete() const override { return true; }
  int observation_count() const override { return grid_observation_count(cfg_); }
  int action_count() const override { return kGridActionCount; }
  int max_steps() const override { return cfg_.max_steps; }

  Observation reset(RngStream&) override {
    state_ = cfg_.start;
    done_ = false;
    return observe();
  }

  StepOutcome step(const ActionValue& a, RngStream& rng) override {
    require(!done_, "PuddleJumpGrid: step after terminal state; reset first");
    GridTransition tr = grid_step(state_, a, rng, cfg_);
    state_ = tr.next;
    done_ = tr.terminal;
    return {observe(), tr.reward, tr.terminal};
  }

  const GridConfig& config() const { return cfg_; }
  GridState state() const { return state_; }

 private:
  Observation observe() const { return Observation::discrete(grid_observe(state_, cfg_)); }

  GridConfig cfg_;
  GridState state_{};
  bool done_ = false;
};

}  // namespace shaperl
