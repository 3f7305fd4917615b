#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "shaperl/core.hpp"
#include "shaperl/gridworld.hpp"
#include "shaperl/shaping.hpp"

namespace shaperl {

// Enumerable MDP used as ground truth by the solvers below. Terminal states
// self-loop with zero reward; potentials are treated as zero at terminal
// states so the episodic and discounted conventions agree.
struct TabularMDP {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s'] row-major
  std::vector<double> reward;      // [s][a]
  std::vector<std::uint8_t> terminal;
  std::vector<double> rho0;
  double gamma = 0.95;

  TabularMDP() = default;
  TabularMDP(int n_states, int n_actions, double gamma)
      : n_states(n_states),
        n_actions(n_actions),
        transition(std::size_t(n_states) * n_actions * n_states, 0.0),
        reward(std::size_t(n_states) * n_actions, 0.0),
        terminal(n_states, 0),
        rho0(n_states, 1.0 / double(n_states)),
        gamma(gamma) {}

  double t(int s, int a, int s2) const {
    return transition[(std::size_t(s) * n_actions + a) * n_states + s2];
  }
  double& t(int s, int a, int s2) {
    return transition[(std::size_t(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const { return reward[std::size_t(s) * n_actions + a]; }
  double& r(int s, int a) { return reward[std::size_t(s) * n_actions + a]; }

  void validate() const {
    require(gamma > 0.0 && gamma < 1.0, "TabularMDP: gamma must be in (0, 1)");
    double rho_sum = 0.0;
    for (double p : rho0) rho_sum += p;
    require(std::abs(rho_sum - 1.0) <= 1e-9, "TabularMDP: rho0 must sum to 1");
    for (int s = 0; s < n_states; ++s) {
      for (int a = 0; a < n_actions; ++a) {
        double row = 0.0;
        for (int s2 = 0; s2 < n_states; ++s2) {
          require(t(s, a, s2) >= 0.0, "TabularMDP: negative transition probability");
          row += t(s, a, s2);
        }
        require(std::abs(row - 1.0) <= 1e-12, "TabularMDP: transition row must sum to 1");
        if (terminal[s]) {
          require(t(s, a, s) == 1.0 && r(s, a) == 0.0,
                  "TabularMDP: terminal states must self-loop with zero reward");
        }
      }
    }
  }
};

// Dirichlet(1) transition rows, rewards uniform in [-1, 1], uniform rho0,
// no terminal states.
inline TabularMDP random_mdp(int n_states, int n_actions, double gamma, RngStream& rng) {
  TabularMDP mdp(n_states, n_actions, gamma);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double total = 0.0;
      std::vector<double> row(n_states);
      for (int s2 = 0; s2 < n_states; ++s2) {
        row[s2] = -std::log(1.0 - rng.uniform());
        total += row[s2];
      }
      for (int s2 = 0; s2 < n_states; ++s2) mdp.t(s, a, s2) = row[s2] / total;
      mdp.r(s, a) = rng.uniform(-1.0, 1.0);
    }
  }
  return mdp;
}

inline std::vector<double> random_stochastic_policy(int n_states, int n_actions, RngStream& rng) {
  std::vector<double> policy(std::size_t(n_states) * n_actions);
  for (int s = 0; s < n_states; ++s) {
    double total = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      policy[std::size_t(s) * n_actions + a] = -std::log(1.0 - rng.uniform());
      total += policy[std::size_t(s) * n_actions + a];
    }
    for (int a = 0; a < n_actions; ++a) policy[std::size_t(s) * n_actions + a] /= total;
  }
  return policy;
}

namespace detail {

inline std::vector<double> phi_s_table(const TabularMDP& mdp, const PotentialScheme& scheme) {
  std::vector<double> phi(mdp.n_states, 0.0);
  for (int s = 0; s < mdp.n_states; ++s) {
    if (!mdp.terminal[s]) phi[s] = scheme.state_potential(Observation::discrete(s));
  }
  return phi;
}

inline std::vector<double> phi_sa_table(const TabularMDP& mdp, const PotentialScheme& scheme) {
  std::vector<double> phi(std::size_t(mdp.n_states) * mdp.n_actions, 0.0);
  for (int s = 0; s < mdp.n_states; ++s) {
    if (mdp.terminal[s]) continue;
    for (int a = 0; a < mdp.n_actions; ++a) {
      phi[std::size_t(s) * mdp.n_actions + a] =
          scheme.action_potential(Observation::discrete(s), ActionValue::discrete(a));
    }
  }
  return phi;
}

inline void check_policy(const TabularMDP& mdp, const std::vector<double>& policy) {
  require(policy.size() == std::size_t(mdp.n_states) * mdp.n_actions,
          "policy_evaluation: policy shape mismatch");
  for (int s = 0; s < mdp.n_states; ++s) {
    double row = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      double p = policy[std::size_t(s) * mdp.n_actions + a];
      require(p >= 0.0, "policy_evaluation: negative action probability");
      row += p;
    }
    require(std::abs(row - 1.0) <= 1e-9, "policy_evaluation: policy rows must sum to 1");
  }
}

// Expected immediate reward of the shaped MDP M'. Look-ahead advice takes the
// expectation of phi(s', a') over a' ~ policy at s'; rows of terminal states
// are left unshaped.
inline std::vector<double> shaped_rewards(const TabularMDP& mdp, const PotentialScheme& scheme,
                                          const std::vector<double>* policy) {
  std::vector<double> shaped(mdp.reward);
  if (scheme.mode == ShapingMode::none) return shaped;
  require(scheme.mode != ShapingMode::look_back_pba,
          "oracle solvers: look-back advice is not a Markov reward modification");
  if (scheme.mode == ShapingMode::pbrs) {
    std::vector<double> phi = phi_s_table(mdp, scheme);
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[s]) continue;
      for (int a = 0; a < mdp.n_actions; ++a) {
        double expected_next = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) expected_next += mdp.t(s, a, s2) * phi[s2];
        shaped[std::size_t(s) * mdp.n_actions + a] += mdp.gamma * expected_next - phi[s];
      }
    }
  } else {
    require(policy != nullptr, "oracle solvers: look-ahead shaping needs the evaluated policy");
    std::vector<double> phi = phi_sa_table(mdp, scheme);
    std::vector<double> phi_mean(mdp.n_states, 0.0);
    for (int s2 = 0; s2 < mdp.n_states; ++s2) {
      for (int a2 = 0; a2 < mdp.n_actions; ++a2) {
        phi_mean[s2] += (*policy)[std::size_t(s2) * mdp.n_actions + a2] *
                        phi[std::size_t(s2) * mdp.n_actions + a2];
      }
    }
    for (int s = 0; s < mdp.n_states; ++s) {
      if (mdp.terminal[s]) continue;
      for (int a = 0; a < mdp.n_actions; ++a) {
        double expected_next = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) expected_next += mdp.t(s, a, s2) * phi_mean[s2];
        shaped[std::size_t(s) * mdp.n_actions + a] +=
            mdp.gamma * expected_next - phi[std::size_t(s) * mdp.n_actions + a];
      }
    }
  }
  return shaped;
}

}  // namespace detail

// Iterative Bellman expectation backups for Q^pi on the (optionally shaped)
// MDP, to successive-iterate sup-norm tol.
inline std::vector<double> policy_evaluation(const TabularMDP& mdp,
                                             const std::vector<double>& policy,
                                             const PotentialScheme& scheme, double tol = 1e-10,
                                             int max_iters = 1000000) {
  detail::check_policy(mdp, policy);
  std::vector<double> shaped = detail::shaped_rewards(mdp, scheme, &policy);
  std::vector<double> q(std::size_t(mdp.n_states) * mdp.n_actions, 0.0);
  std::vector<double> v(mdp.n_states, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    for (int s = 0; s < mdp.n_states; ++s) {
      double acc = 0.0;
      for (int a = 0; a < mdp.n_actions; ++a) {
        acc += policy[std::size_t(s) * mdp.n_actions + a] * q[std::size_t(s) * mdp.n_actions + a];
      }
      v[s] = acc;
    }
    double diff = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        double target = shaped[std::size_t(s) * mdp.n_actions + a];
        double expected_v = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) expected_v += mdp.t(s, a, s2) * v[s2];
        target += mdp.gamma * expected_v;
        diff = std::max(diff, std::abs(target - q[std::size_t(s) * mdp.n_actions + a]));
        q[std::size_t(s) * mdp.n_actions + a] = target;
      }
    }
    if (diff <= tol) return q;
  }
  throw std::runtime_error("policy_evaluation: did not converge");
}

struct ValueIterationResult {
  std::vector<double> q;
  std::vector<int> greedy;  // lowest-index tie-break
};

// Optimal Q of the (optionally shaped) MDP. With look-ahead advice the
// advice term rides inside the max: V(s') = max_a' (Q(s', a') + phi(s', a')).
inline ValueIterationResult value_iteration(const TabularMDP& mdp, const PotentialScheme& scheme,
                                            double tol = 1e-10, int max_iters = 1000000) {
  require(mdp.gamma < 1.0, "value_iteration: gamma must be < 1");
  const bool look_ahead = scheme.mode == ShapingMode::look_ahead_pba;
  std::vector<double> phi_sa;
  std::vector<double> shaped;
  if (look_ahead) {
    phi_sa = detail::phi_sa_table(mdp, scheme);
    shaped = mdp.reward;
    for (std::size_t i = 0; i < shaped.size(); ++i) shaped[i] -= phi_sa[i];
    for (int s = 0; s < mdp.n_states; ++s) {
      if (!mdp.terminal[s]) continue;
      for (int a = 0; a < mdp.n_actions; ++a) shaped[std::size_t(s) * mdp.n_actions + a] = mdp.r(s, a);
    }
  } else {
    shaped = detail::shaped_rewards(mdp, scheme, nullptr);
  }

  std::vector<double> q(std::size_t(mdp.n_states) * mdp.n_actions, 0.0);
  std::vector<double> v(mdp.n_states, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    for (int s = 0; s < mdp.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < mdp.n_actions; ++a) {
        double val = q[std::size_t(s) * mdp.n_actions + a];
        if (look_ahead) val += phi_sa[std::size_t(s) * mdp.n_actions + a];
        best = std::max(best, val);
      }
      v[s] = best;
    }
    double diff = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        double target = shaped[std::size_t(s) * mdp.n_actions + a];
        double expected_v = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) expected_v += mdp.t(s, a, s2) * v[s2];
        target += mdp.gamma * expected_v;
        diff = std::max(diff, std::abs(target - q[std::size_t(s) * mdp.n_actions + a]));
        q[std::size_t(s) * mdp.n_actions + a] = target;
      }
    }
    if (diff <= tol) break;
    if (it + 1 == max_iters) throw std::runtime_error("value_iteration: did not converge");
  }

  ValueIterationResult result;
  result.q = std::move(q);
  result.greedy.resize(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    result.greedy[s] =
        argmax_lowest(std::span<const double>(result.q).subspan(std::size_t(s) * mdp.n_actions,
                                                                mdp.n_actions));
  }
  return result;
}

// Fixed point of Q = R + gamma * E[log sum_a exp Q(s', a)], with the soft
// value pinned to 0 at terminal states (episodic convention, alpha = 1).
inline std::vector<double> soft_q_fixed_point(const TabularMDP& mdp, double tol = 1e-10,
                                              int max_iters = 1000000) {
  require(mdp.gamma < 1.0, "soft_q_fixed_point: gamma must be < 1");
  std::vector<double> q(std::size_t(mdp.n_states) * mdp.n_actions, 0.0);
  std::vector<double> v(mdp.n_states, 0.0);
  for (int it = 0; it < max_iters; ++it) {
    for (int s = 0; s < mdp.n_states; ++s) {
      v[s] = mdp.terminal[s]
                 ? 0.0
                 : log_sum_exp(std::span<const double>(q).subspan(std::size_t(s) * mdp.n_actions,
                                                                  mdp.n_actions));
    }
    double diff = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        double target = mdp.r(s, a);
        for (int s2 = 0; s2 < mdp.n_states; ++s2) target += mdp.gamma * mdp.t(s, a, s2) * v[s2];
        diff = std::max(diff, std::abs(target - q[std::size_t(s) * mdp.n_actions + a]));
        q[std::size_t(s) * mdp.n_actions + a] = target;
      }
    }
    if (diff <= tol) return q;
  }
  throw std::runtime_error("soft_q_fixed_point: did not converge");
}

namespace detail {

// Solve A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
  const int n = int(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row) {
      if (std::abs(a[std::size_t(row) * n + col]) > std::abs(a[std::size_t(pivot) * n + col])) {
        pivot = row;
      }
    }
    if (std::abs(a[std::size_t(pivot) * n + col]) < 1e-12) {
      throw std::runtime_error("solve_linear: singular system");
    }
    if (pivot != col) {
      for (int k = col; k < n; ++k) std::swap(a[std::size_t(col) * n + k], a[std::size_t(pivot) * n + k]);
      std::swap(b[col], b[pivot]);
    }
    for (int row = col + 1; row < n; ++row) {
      double f = a[std::size_t(row) * n + col] / a[std::size_t(col) * n + col];
      if (f == 0.0) continue;
      for (int k = col; k < n; ++k) a[std::size_t(row) * n + k] -= f * a[std::size_t(col) * n + k];
      b[row] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int row = n - 1; row >= 0; --row) {
    double acc = b[row];
    for (int k = row + 1; k < n; ++k) acc -= a[std::size_t(row) * n + k] * x[k];
    x[row] = acc / a[std::size_t(row) * n + row];
  }
  return x;
}

}  // namespace detail

// Unnormalized discounted state occupancy d = rho0 + gamma * P_pi^T d.
inline std::vector<double> discounted_occupancy(const TabularMDP& mdp,
                                                const std::vector<double>& policy) {
  require(mdp.gamma < 1.0, "discounted_occupancy: gamma must be < 1");
  detail::check_policy(mdp, policy);
  const int n = mdp.n_states;
  std::vector<double> a(std::size_t(n) * n, 0.0);
  for (int s = 0; s < n; ++s) a[std::size_t(s) * n + s] = 1.0;
  for (int s = 0; s < n; ++s) {
    for (int act = 0; act < mdp.n_actions; ++act) {
      double p = policy[std::size_t(s) * mdp.n_actions + act];
      if (p == 0.0) continue;
      for (int s2 = 0; s2 < n; ++s2) {
        a[std::size_t(s2) * n + s] -= mdp.gamma * p * mdp.t(s, act, s2);
      }
    }
  }
  return detail::solve_linear(std::move(a), mdp.rho0);
}

// Exact gradient of J(theta) for a tabular softmax policy: occupancy by
// linear solve, then d(s) * pi(a|s) * (Q(s, a) - V(s)) per entry.
inline std::vector<double> exact_policy_gradient(const TabularMDP& mdp,
                                                 const std::vector<double>& theta) {
  require(theta.size() == std::size_t(mdp.n_states) * mdp.n_actions,
          "exact_policy_gradient: theta shape mismatch");
  std::vector<double> policy(theta.size());
  for (int s = 0; s < mdp.n_states; ++s) {
    auto probs = softmax(
        std::span<const double>(theta).subspan(std::size_t(s) * mdp.n_actions, mdp.n_actions));
    std::copy(probs.begin(), probs.end(), policy.begin() + std::size_t(s) * mdp.n_actions);
  }
  std::vector<double> q = policy_evaluation(mdp, policy, PotentialScheme{}, 1e-12);
  std::vector<double> d = discounted_occupancy(mdp, policy);
  std::vector<double> grad(theta.size(), 0.0);
  for (int s = 0; s < mdp.n_states; ++s) {
    double v = 0.0;
    for (int a = 0; a < mdp.n_actions; ++a) {
      v += policy[std::size_t(s) * mdp.n_actions + a] * q[std::size_t(s) * mdp.n_actions + a];
    }
    for (int a = 0; a < mdp.n_actions; ++a) {
      std::size_t i = std::size_t(s) * mdp.n_actions + a;
      grad[i] = d[s] * policy[i] * (q[i] - v);
    }
  }
  return grad;
}

// J(pi) = E_rho0 [ V^pi(s0) ] on the (optionally shaped) MDP.
inline double policy_objective(const TabularMDP& mdp, const std::vector<double>& policy,
                               const PotentialScheme& scheme) {
  std::vector<double> q = policy_evaluation(mdp, policy, scheme, 1e-12);
  double j = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      j += mdp.rho0[s] * policy[std::size_t(s) * mdp.n_actions + a] *
           q[std::size_t(s) * mdp.n_actions + a];
    }
  }
  return j;
}

// The puddle-jump gridworld over its 99 observations as an exact TabularMDP.
// The aliased observation behaves as the even mixture of its two cells, which
// is the stationary convention the agents' observation stream induces.
inline TabularMDP export_gridworld_as_tabular(const GridConfig& cfg, double gamma_override) {
  require(gamma_override > 0.0 && gamma_override < 1.0,
          "export_gridworld_as_tabular: oracle solvers need gamma in (0, 1)");
  cfg.validate();
  const int n_obs = grid_observation_count(cfg);
  TabularMDP mdp(n_obs, kGridActionCount, gamma_override);
  mdp.rho0.assign(n_obs, 0.0);
  mdp.rho0[grid_observe(cfg.start, cfg)] = 1.0;
  const int goal_obs = grid_observe(cfg.goal, cfg);
  auto cells = grid_observation_cells(cfg);
  for (int o = 0; o < n_obs; ++o) {
    if (o == goal_obs) {
      mdp.terminal[o] = 1;
      for (int a = 0; a < kGridActionCount; ++a) mdp.t(o, a, o) = 1.0;
      continue;
    }
    const double w = 1.0 / double(cells[o].size());
    for (const GridState& s : cells[o]) {
      for (int a = 0; a < kGridActionCount; ++a) {
        for (const auto& [next, p] : grid_transition_dist(s, GridAction(a), cfg)) {
          mdp.t(o, a, grid_observe(next, cfg)) += w * p;
          double reward = cfg.step_reward + (next == cfg.goal ? cfg.goal_reward : 0.0);
          mdp.r(o, a) += w * p * reward;
        }
      }
    }
  }
  return mdp;
}

// Environment adapter so the learning agents can run on an exact TabularMDP.
class TabularMdpEnv final : public Environment {
 public:
  explicit TabularMdpEnv(TabularMDP mdp, int max_steps = 1000)
      : mdp_(std::move(mdp)), max_steps_(max_steps) {
    mdp_.validate();
  }

  bool discrete() const override { return true; }
  int observation_count() const override { return mdp_.n_states; }
  int action_count() const override { return mdp_.n_actions; }
  int max_steps() const override { return max_steps_; }

  Observation reset(RngStream& rng) override {
    state_ = sample(mdp_.rho0, rng);
    done_ = false;
    return Observation::discrete(state_);
  }

  StepOutcome step(const ActionValue& a, RngStream& rng) override {
    require(!done_, "TabularMdpEnv: step after terminal state; reset first");
    require(a.index >= 0 && a.index < mdp_.n_actions, "TabularMdpEnv: invalid action index");
    double reward = mdp_.r(state_, a.index);
    std::vector<double> row(mdp_.n_states);
    for (int s2 = 0; s2 < mdp_.n_states; ++s2) row[s2] = mdp_.t(state_, a.index, s2);
    state_ = sample(row, rng);
    done_ = bool(mdp_.terminal[state_]);
    return {Observation::discrete(state_), reward, done_};
  }

  const TabularMDP& mdp() const { return mdp_; }

 private:
  static int sample(const std::vector<double>& probs, RngStream& rng) {
    return rng.categorical(probs);
  }

  TabularMDP mdp_;
  int max_steps_;
  int state_ = 0;
  bool done_ = false;
};

}  // namespace shaperl
