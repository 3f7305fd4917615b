#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shaperl/core.hpp"
#include "shaperl/gridworld.hpp"
#include "shaperl/mountain_car.hpp"

namespace shaperl {

enum class ShapingMode { none, pbrs, look_ahead_pba, look_back_pba };

inline const char* to_string(ShapingMode m) {
  switch (m) {
    case ShapingMode::none: return "none";
    case ShapingMode::pbrs: return "pbrs";
    case ShapingMode::look_ahead_pba: return "look_ahead_pba";
    case ShapingMode::look_back_pba: return "look_back_pba";
  }
  return "none";
}

inline ShapingMode shaping_mode_from_string(const std::string& s) {
  if (s == "none") return ShapingMode::none;
  if (s == "pbrs") return ShapingMode::pbrs;
  if (s == "look_ahead_pba") return ShapingMode::look_ahead_pba;
  if (s == "look_back_pba") return ShapingMode::look_back_pba;
  throw std::invalid_argument("unknown shaping mode: " + s);
}

// A potential function plus the shaping mode it feeds. PBRS carries a state
// potential phi(s); the PBA modes carry a state-action potential phi(s, a).
struct PotentialScheme {
  ShapingMode mode = ShapingMode::none;
  std::function<double(const Observation&)> phi_s;
  std::function<double(const Observation&, const ActionValue&)> phi_sa;
  bool terminal_potential_zero = true;

  double state_potential(const Observation& s) const {
    require(bool(phi_s), "PotentialScheme: phi_s is not populated");
    return phi_s(s);
  }

  double action_potential(const Observation& s, const ActionValue& a) const {
    require(bool(phi_sa), "PotentialScheme: phi_sa is not populated");
    return phi_sa(s, a);
  }
};

// F = gamma * phi(s') - phi(s).
inline double pbrs_bonus(const PotentialScheme& scheme, const Observation& s,
                         const Observation& s_next, bool terminal, double gamma) {
  require(scheme.mode == ShapingMode::pbrs, "pbrs_bonus: scheme mode must be pbrs");
  double phi_next =
      (terminal && scheme.terminal_potential_zero) ? 0.0 : scheme.state_potential(s_next);
  return gamma * phi_next - scheme.state_potential(s);
}

// F = gamma * phi(s', a') - phi(s, a); phi(s', .) is 0 on terminal s'.
inline double look_ahead_bonus(const PotentialScheme& scheme, const Observation& s,
                               const ActionValue& a, const Observation& s_next,
                               const std::optional<ActionValue>& a_next, bool terminal,
                               double gamma) {
  require(scheme.mode == ShapingMode::look_ahead_pba,
          "look_ahead_bonus: scheme mode must be look_ahead_pba");
  double phi_next = 0.0;
  if (!terminal) {
    require(a_next.has_value(), "look_ahead_bonus: a_next required on a non-terminal step");
    phi_next = scheme.action_potential(s_next, *a_next);
  }
  return gamma * phi_next - scheme.action_potential(s, a);
}

// F = phi(s, a) - phi(s_prev, a_prev) / gamma; the look-back term is 0 on the
// first step of an episode (there is no prior step).
inline double look_back_bonus(const PotentialScheme& scheme, const Observation& s,
                              const ActionValue& a, const Observation& s_prev,
                              const ActionValue& a_prev, bool is_first_step, double gamma) {
  require(scheme.mode == ShapingMode::look_back_pba,
          "look_back_bonus: scheme mode must be look_back_pba");
  require(gamma > 0.0, "look_back_bonus: gamma must be positive");
  double prev = is_first_step ? 0.0 : scheme.action_potential(s_prev, a_prev) / gamma;
  return scheme.action_potential(s, a) - prev;
}

// ---- gridworld potentials ----

// u0 on the two rows below the puddle, u1 everywhere else; u1 > u0 makes
// crossing worthwhile.
inline double grid_pbrs_potential(GridState s, double u0, double u1) {
  require(u1 > u0, "grid_pbrs_potential: need u1 > u0");
  return (s.y <= 1) ? u0 : u1;
}

// 1 when the deterministic successor of (s, a) is strictly closer to the goal
// in l1 distance; the jump action is judged by its success landing cell.
inline int grid_advice_flag(GridState s, GridAction a, const GridConfig& cfg) {
  GridState next = (a == GridAction::jump) ? grid_jump_target(s, cfg) : grid_move(s, a, cfg);
  int dist = std::abs(cfg.goal.x - s.x) + std::abs(cfg.goal.y - s.y);
  int next_dist = std::abs(cfg.goal.x - next.x) + std::abs(cfg.goal.y - next.y);
  return next_dist < dist ? 1 : 0;
}

// State-action potential whose mean over the five actions equals the PBRS
// state potential, with advice weight kappa on goal-approaching actions.
inline double grid_pba_potential(GridState s, GridAction a, double u0, double u1, double kappa,
                                 const GridConfig& cfg) {
  require(kappa > 0.0, "grid_pba_potential: kappa must be positive");
  double mean = 0.0;
  for (int i = 0; i < kGridActionCount; ++i) {
    mean += grid_advice_flag(s, GridAction(i), cfg);
  }
  mean /= kGridActionCount;
  return grid_pbrs_potential(s, u0, u1) + kappa * (grid_advice_flag(s, a, cfg) - mean);
}

// ---- mountain-car potentials ----

// phi(s) = p + 2; larger when the car sits horizontally closer to the goal.
inline double car_pbrs_potential(const CarState& s) { return s.p + 2.0; }

// 1 when the action pushes along the current velocity, 0 otherwise
// (inaction is never advised).
inline double car_pba_potential(const CarState& s, double action) {
  return (action * s.v > 0.0) ? 1.0 : 0.0;
}

// ---- observation-level scheme builders used by the agents ----

// Gridworld scheme over observation ids. The aliased observation takes the
// mean potential of its two underlying cells.
inline PotentialScheme grid_potential_scheme(ShapingMode mode, double u0, double u1, double kappa,
                                             const GridConfig& cfg) {
  PotentialScheme scheme;
  scheme.mode = mode;
  if (mode == ShapingMode::none) return scheme;

  auto cells = grid_observation_cells(cfg);
  const int n_obs = grid_observation_count(cfg);
  if (mode == ShapingMode::pbrs) {
    std::vector<double> table(n_obs, 0.0);
    for (int o = 0; o < n_obs; ++o) {
      for (const GridState& s : cells[o]) table[o] += grid_pbrs_potential(s, u0, u1);
      table[o] /= double(cells[o].size());
    }
    scheme.phi_s = [table](const Observation& s) { return table.at(s.id); };
  } else {
    std::vector<double> table(std::size_t(n_obs) * kGridActionCount, 0.0);
    for (int o = 0; o < n_obs; ++o) {
      for (int a = 0; a < kGridActionCount; ++a) {
        double phi = 0.0;
        for (const GridState& s : cells[o]) {
          phi += grid_pba_potential(s, GridAction(a), u0, u1, kappa, cfg);
        }
        table[std::size_t(o) * kGridActionCount + a] = phi / double(cells[o].size());
      }
    }
    scheme.phi_sa = [table](const Observation& s, const ActionValue& a) {
      return table.at(std::size_t(s.id) * kGridActionCount + a.index);
    };
  }
  return scheme;
}

inline PotentialScheme car_potential_scheme(ShapingMode mode) {
  PotentialScheme scheme;
  scheme.mode = mode;
  if (mode == ShapingMode::pbrs) {
    scheme.phi_s = [](const Observation& s) { return CarState{s.coords.at(0), s.coords.at(1)}.p + 2.0; };
  } else if (mode != ShapingMode::none) {
    scheme.phi_sa = [](const Observation& s, const ActionValue& a) {
      return car_pba_potential(CarState{s.coords.at(0), s.coords.at(1)}, a.scalar);
    };
  }
  return scheme;
}

}  // namespace shaperl
