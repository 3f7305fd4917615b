#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "shaperl/core.hpp"
#include "shaperl/shaping.hpp"

namespace shaperl {

struct QTable {
  int n_obs = 0;
  int n_actions = 0;
  std::vector<double> values;

  QTable() = default;
  QTable(int n_obs, int n_actions, double init = 0.0)
      : n_obs(n_obs), n_actions(n_actions), values(std::size_t(n_obs) * n_actions, init) {}

  double operator()(int s, int a) const { return values[std::size_t(s) * n_actions + a]; }
  double& operator()(int s, int a) { return values[std::size_t(s) * n_actions + a]; }
  std::span<const double> row(int s) const {
    return {values.data() + std::size_t(s) * n_actions, std::size_t(n_actions)};
  }
};

struct SoftQConfig {
  double alpha = 1.0;         // entropy temperature; kept at 1 in replication runs
  double lr0 = 0.5;           // lambda_k = lr0 / (1 + k / lr_decay)
  double lr_decay = 10000.0;  // <= 0 means a constant rate lr0
  double gamma = 0.99;
  double q_init = 0.0;
  std::vector<double> q_init_table;  // row-major per-entry init; overrides q_init when set

  void validate() const {
    require(alpha > 0.0, "SoftQConfig: alpha must be positive");
    require(lr0 > 0.0, "SoftQConfig: lr0 must be positive");
    require(gamma > 0.0 && gamma <= 1.0, "SoftQConfig: gamma must be in (0, 1]");
  }

  QTable make_q(int n_obs, int n_actions) const {
    QTable q(n_obs, n_actions, q_init);
    if (!q_init_table.empty()) {
      require(q_init_table.size() == q.values.size(),
              "SoftQConfig: q_init_table size must match observations x actions");
      q.values = q_init_table;
    }
    return q;
  }
};

inline double soft_q_learning_rate(const SoftQConfig& cfg, std::int64_t k) {
  if (cfg.lr_decay <= 0.0) return cfg.lr0;
  return cfg.lr0 / (1.0 + double(k) / cfg.lr_decay);
}

// V(s) = alpha * log sum_a exp(Q(s, a) / alpha), max-shifted.
inline double soft_value(const QTable& q, int obs, double alpha = 1.0) {
  require(alpha > 0.0, "soft_value: alpha must be positive");
  auto row = q.row(obs);
  if (alpha == 1.0) return log_sum_exp(row);
  std::vector<double> scaled(row.begin(), row.end());
  for (double& x : scaled) x /= alpha;
  return alpha * log_sum_exp(scaled);
}

// pi(a|s) = exp((Q(s, a) - V(s)) / alpha); a softmax over the Q row.
inline std::vector<double> soft_policy(const QTable& q, int obs, double alpha = 1.0) {
  require(alpha > 0.0, "soft_policy: alpha must be positive");
  auto row = q.row(obs);
  if (alpha == 1.0) return softmax(row);
  std::vector<double> scaled(row.begin(), row.end());
  for (double& x : scaled) x /= alpha;
  return softmax(scaled);
}

// delta = r (+ PBRS bonus) + gamma * V(s') - Q(s, a), with V(s') = 0 on
// terminal transitions. Value-based shaping is state-potential only, so the
// PBA modes are rejected.
inline double soft_bellman_error(const QTable& q, const Experience& e,
                                 const PotentialScheme& scheme, double gamma) {
  require(scheme.mode == ShapingMode::none || scheme.mode == ShapingMode::pbrs,
          "soft_bellman_error: only none/pbrs schemes apply to soft Q-learning");
  double bonus =
      (scheme.mode == ShapingMode::pbrs) ? pbrs_bonus(scheme, e.s, e.s_next, e.terminal, gamma) : 0.0;
  double v_next = e.terminal ? 0.0 : soft_value(q, e.s_next.id);
  return e.r + bonus + gamma * v_next - q(e.s.id, e.a.index);
}

// Q(s, a) += lr * delta; touches exactly one entry. Returns the new value.
inline double soft_q_update(QTable& q, const Experience& e, const PotentialScheme& scheme,
                            double lr, double gamma) {
  double delta = soft_bellman_error(q, e, scheme, gamma);
  require(std::isfinite(delta), "soft_q_update: non-finite Bellman error");
  q(e.s.id, e.a.index) += lr * delta;
  return q(e.s.id, e.a.index);
}

struct SoftQResult {
  QTable q;
  std::vector<RunRecord> records;
};

// Tabular soft Q-learning; the behavior policy is the soft policy of the
// current Q (intrinsically stochastic, no epsilon schedule).
inline SoftQResult train_soft_q(Environment& env, const PotentialScheme& scheme,
                                const SoftQConfig& cfg, int episodes, std::uint64_t seed) {
  require(env.discrete(), "train_soft_q: requires a discrete environment");
  cfg.validate();
  SoftQResult result;
  result.q = cfg.make_q(env.observation_count(), env.action_count());
  std::int64_t k = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    RngStream rng = RngStream::derive(seed, {std::uint64_t(ep)});
    Observation s = env.reset(rng);
    double ret = 0.0;
    int steps = 0;
    bool success = false;
    for (int t = 0; t < env.max_steps(); ++t) {
      std::vector<double> probs = soft_policy(result.q, s.id, cfg.alpha);
      ActionValue a = ActionValue::discrete(rng.categorical(probs));
      StepOutcome out = env.step(a, rng);
      Experience e{s, a, out.reward, out.s_next, out.terminal};
      soft_q_update(result.q, e, scheme, soft_q_learning_rate(cfg, k), cfg.gamma);
      ++k;
      ret += out.reward;
      ++steps;
      s = out.s_next;
      if (out.terminal) {
        success = true;
        break;
      }
    }
    result.records.push_back({ep, seed, to_string(scheme.mode), ret, steps, success});
  }
  return result;
}

// Runs the two-agent equivalence of shaping-vs-initialization: agent L learns
// with PBRS from init Q0 and generates the experience stream; agent L' learns
// unshaped from init Q0 + phi on the same tuples. Returns the largest
// absolute difference between their accumulated Q-changes over all steps.
inline double learnability_experiment(Environment& env, const std::vector<double>& phi,
                                      const QTable& q0, const SoftQConfig& cfg,
                                      std::int64_t steps, std::uint64_t seed) {
  require(env.discrete(), "learnability_experiment: requires a discrete environment");
  require(int(phi.size()) == env.observation_count(),
          "learnability_experiment: phi must have one entry per observation");
  cfg.validate();

  PotentialScheme shaped;
  shaped.mode = ShapingMode::pbrs;
  shaped.phi_s = [&phi](const Observation& s) { return phi.at(s.id); };
  PotentialScheme unshaped;

  QTable q_l = q0;
  QTable q_lp = q0;
  for (int s = 0; s < q_lp.n_obs; ++s) {
    for (int a = 0; a < q_lp.n_actions; ++a) q_lp(s, a) += phi[s];
  }
  const QTable init_l = q_l;
  const QTable init_lp = q_lp;

  double max_dev = 0.0;
  std::int64_t k = 0;
  std::uint64_t episode = 0;
  RngStream rng = RngStream::derive(seed, {episode});
  Observation s = env.reset(rng);
  int t_in_episode = 0;
  while (k < steps) {
    std::vector<double> probs = soft_policy(q_l, s.id, cfg.alpha);
    ActionValue a = ActionValue::discrete(rng.categorical(probs));
    StepOutcome out = env.step(a, rng);
    Experience e{s, a, out.reward, out.s_next, out.terminal};
    double lr = soft_q_learning_rate(cfg, k);
    soft_q_update(q_l, e, shaped, lr, cfg.gamma);
    soft_q_update(q_lp, e, unshaped, lr, cfg.gamma);
    ++k;
    ++t_in_episode;

    double delta_l = q_l(e.s.id, e.a.index) - init_l(e.s.id, e.a.index);
    double delta_lp = q_lp(e.s.id, e.a.index) - init_lp(e.s.id, e.a.index);
    max_dev = std::max(max_dev, std::abs(delta_l - delta_lp));

    s = out.s_next;
    if (out.terminal || t_in_episode >= env.max_steps()) {
      ++episode;
      rng = RngStream::derive(seed, {episode});
      s = env.reset(rng);
      t_in_episode = 0;
    }
  }
  for (int si = 0; si < q_l.n_obs; ++si) {
    for (int a = 0; a < q_l.n_actions; ++a) {
      double d = (q_l(si, a) - init_l(si, a)) - (q_lp(si, a) - init_lp(si, a));
      max_dev = std::max(max_dev, std::abs(d));
    }
  }
  return max_dev;
}

// argmax_a (Q_shaped(s, a) + phi(s, a)) per observation, lowest index on ties.
inline std::vector<int> recover_greedy_policy(const QTable& q_shaped,
                                              const std::function<double(int, int)>& phi_sa) {
  std::vector<int> policy(q_shaped.n_obs, 0);
  for (int s = 0; s < q_shaped.n_obs; ++s) {
    std::vector<double> adjusted(q_shaped.n_actions);
    for (int a = 0; a < q_shaped.n_actions; ++a) {
      adjusted[a] = q_shaped(s, a) + (phi_sa ? phi_sa(s, a) : 0.0);
    }
    policy[s] = argmax_lowest(adjusted);
  }
  return policy;
}

inline std::vector<int> recover_greedy_policy(const QTable& q) {
  return recover_greedy_policy(q, nullptr);
}

}  // namespace shaperl
