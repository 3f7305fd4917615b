#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <vector>

#include "shaperl/core.hpp"
#include "shaperl/gaussian.hpp"
#include "shaperl/gridworld.hpp"
#include "shaperl/mlp.hpp"
#include "shaperl/mountain_car.hpp"
#include "shaperl/shaping.hpp"

namespace shaperl {

struct TabularSoftmaxPolicy {
  int n_obs = 0;
  int n_actions = 0;
  std::vector<double> theta;

  TabularSoftmaxPolicy() = default;
  TabularSoftmaxPolicy(int n_obs, int n_actions)
      : n_obs(n_obs), n_actions(n_actions), theta(std::size_t(n_obs) * n_actions, 0.0) {}

  std::span<const double> row(int obs) const {
    return {theta.data() + std::size_t(obs) * n_actions, std::size_t(n_actions)};
  }
  std::span<double> row(int obs) {
    return {theta.data() + std::size_t(obs) * n_actions, std::size_t(n_actions)};
  }
};

inline std::vector<double> softmax_probs(const TabularSoftmaxPolicy& policy, int obs) {
  return softmax(policy.row(obs));
}

// d log pi(a|obs) / d theta(obs, .) = one_hot(a) - pi(.|obs); rows of other
// observations have zero gradient.
inline std::vector<double> grad_log_softmax(const TabularSoftmaxPolicy& policy, int obs, int a) {
  std::vector<double> grad = softmax_probs(policy, obs);
  for (double& g : grad) g = -g;
  grad[a] += 1.0;
  return grad;
}

struct TabularCritic {
  std::vector<double> omega;

  TabularCritic() = default;
  explicit TabularCritic(int n_obs) : omega(n_obs, 0.0) {}
};

struct ACConfig {
  PotentialScheme scheme;
  double alpha_theta = 0.2;
  double alpha_omega = 0.001;
  double gamma = 1.0;
  int t_max = 300;
  double entropy_bonus = 0.0;
  // Gradient descent on the squared TD error moves omega along +delta; the
  // inverted variant (omega along -delta, which drives V away from its
  // target) stays available for A/B inspection.
  bool inverted_critic_sign = false;
  std::vector<int> policy_hidden = {64, 64};
  std::vector<int> value_hidden = {64, 64};

  void validate() const {
    require(alpha_theta > 0.0 && alpha_omega > 0.0, "ACConfig: learning rates must be positive");
    require(gamma > 0.0 && gamma <= 1.0, "ACConfig: gamma must be in (0, 1]");
    require(t_max >= 0, "ACConfig: t_max must be non-negative");
    require(entropy_bonus >= 0.0, "ACConfig: entropy_bonus must be non-negative");
  }
};

// Per-step diagnostics recorded on demand; the unbiasedness-algebra checks
// replay these.
struct AcStepRecord {
  double r = 0.0;
  double phi_cur = 0.0;
  double phi_next = 0.0;
  double bootstrap = 0.0;
  double v_s = 0.0;
  double delta = 0.0;
};

namespace detail {

inline void check_finite_delta(double delta, int episode, int t, ShapingMode mode) {
  if (std::isfinite(delta)) return;
  std::ostringstream msg;
  msg << "ac_pba_episode: non-finite TD error (delta=" << delta << ", scheme=" << to_string(mode)
      << ", episode=" << episode << ", step=" << t << ")";
  throw std::runtime_error(msg.str());
}

// Entropy gradient of a tabular softmax row: dH/dtheta_a = -pi_a (log pi_a + H).
inline std::vector<double> softmax_entropy_grad(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs) h -= p * std::log(p);
  std::vector<double> grad(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) grad[i] = -probs[i] * (std::log(probs[i]) + h);
  return grad;
}

}  // namespace detail

// One episode of the PBA-augmented advantage actor-critic on a discrete
// environment with a tabular softmax actor and a tabular critic. Per step:
//   bootstrap R = 0 on terminal s', else V(s');
//   look-ahead: delta = r + gamma*phi(s',a') - phi(s,a) + gamma*R - V(s),
//               actor coefficient delta + phi(s,a); a' is sampled once at s'
//               and reused as the executed next action;
//   look-back:  delta = r + phi(s,a) - phi(s-,a-)/gamma + gamma*R - V(s),
//               actor coefficient delta (no correction term needed);
//   pbrs:       delta = r + gamma*phi(s') - phi(s) + gamma*R - V(s);
//   none:       plain advantage actor-critic.
inline RunRecord ac_pba_episode(Environment& env, TabularSoftmaxPolicy& policy,
                                TabularCritic& critic, const ACConfig& cfg, RngStream& rng,
                                int episode_index = 0, std::uint64_t seed = 0,
                                std::vector<AcStepRecord>* trace = nullptr) {
  require(env.discrete(), "ac_pba_episode: tabular agent needs a discrete environment");
  cfg.validate();
  const ShapingMode mode = cfg.scheme.mode;
  const bool pba = mode == ShapingMode::look_ahead_pba || mode == ShapingMode::look_back_pba;

  Observation s = env.reset(rng);
  ActionValue a = ActionValue::discrete(rng.categorical(softmax_probs(policy, s.id)));
  double phi_cur = pba ? cfg.scheme.action_potential(s, a) : 0.0;
  double phi_prev = 0.0;
  bool first_step = true;

  double ret = 0.0;
  int steps = 0;
  bool success = false;
  for (int t = 0; t < env.max_steps(); ++t) {
    StepOutcome out = env.step(a, rng);
    ret += out.reward;
    ++steps;

    const double v_s = critic.omega[s.id];
    const double bootstrap = out.terminal ? 0.0 : critic.omega[out.s_next.id];

    std::optional<ActionValue> a_next;
    double phi_next = 0.0;
    if (mode == ShapingMode::look_ahead_pba && !out.terminal) {
      a_next = ActionValue::discrete(rng.categorical(softmax_probs(policy, out.s_next.id)));
      phi_next = cfg.scheme.action_potential(out.s_next, *a_next);
    }

    double delta = 0.0;
    double actor_coeff = 0.0;
    switch (mode) {
      case ShapingMode::none: {
        delta = out.reward + cfg.gamma * bootstrap - v_s;
        actor_coeff = delta;
        break;
      }
      case ShapingMode::pbrs: {
        double f = pbrs_bonus(cfg.scheme, s, out.s_next, out.terminal, cfg.gamma);
        delta = out.reward + f + cfg.gamma * bootstrap - v_s;
        actor_coeff = delta;
        break;
      }
      case ShapingMode::look_ahead_pba: {
        double target = out.reward + cfg.gamma * phi_next + cfg.gamma * bootstrap - v_s;
        delta = target - phi_cur;
        actor_coeff = delta + phi_cur;
        break;
      }
      case ShapingMode::look_back_pba: {
        double f = phi_cur - (first_step ? 0.0 : phi_prev / cfg.gamma);
        delta = out.reward + f + cfg.gamma * bootstrap - v_s;
        actor_coeff = delta;
        break;
      }
    }
    detail::check_finite_delta(delta, episode_index, t, mode);

    std::vector<double> probs = softmax_probs(policy, s.id);
    auto theta_row = policy.row(s.id);
    for (int i = 0; i < policy.n_actions; ++i) {
      double g = (i == a.index ? 1.0 : 0.0) - probs[i];
      theta_row[i] += cfg.alpha_theta * actor_coeff * g;
    }
    if (cfg.entropy_bonus > 0.0) {
      std::vector<double> h_grad = detail::softmax_entropy_grad(probs);
      for (int i = 0; i < policy.n_actions; ++i) {
        theta_row[i] += cfg.alpha_theta * cfg.entropy_bonus * h_grad[i];
      }
    }
    critic.omega[s.id] += (cfg.inverted_critic_sign ? -1.0 : 1.0) * cfg.alpha_omega * delta;

    if (trace) trace->push_back({out.reward, phi_cur, phi_next, bootstrap, v_s, delta});

    phi_prev = phi_cur;
    first_step = false;
    if (out.terminal) {
      success = true;
      break;
    }
    s = out.s_next;
    if (mode == ShapingMode::look_ahead_pba) {
      a = *a_next;
      phi_cur = phi_next;
    } else {
      a = ActionValue::discrete(rng.categorical(softmax_probs(policy, s.id)));
      phi_cur = pba ? cfg.scheme.action_potential(s, a) : 0.0;
    }
  }
  return {episode_index, seed, to_string(mode), ret, steps, success};
}

// Gaussian-policy actor-critic for continuous domains: both heads come out of
// one policy net (mean, raw log_std), the critic is its own net, and both are
// updated online with Adam.
struct GaussianActorCritic {
  Mlp policy;
  Mlp value;
  AdamState policy_opt, value_opt;

  GaussianActorCritic() = default;
  GaussianActorCritic(int obs_dim, const ACConfig& cfg, RngStream& rng) {
    std::vector<int> p_sizes{obs_dim};
    p_sizes.insert(p_sizes.end(), cfg.policy_hidden.begin(), cfg.policy_hidden.end());
    p_sizes.push_back(2);
    std::vector<int> v_sizes{obs_dim};
    v_sizes.insert(v_sizes.end(), cfg.value_hidden.begin(), cfg.value_hidden.end());
    v_sizes.push_back(1);
    policy = Mlp(p_sizes, rng);
    value = Mlp(v_sizes, rng);
  }

  GaussianPolicyOut head(std::span<const double> obs, MlpCache& cache) const {
    auto out = mlp_forward(policy, obs, cache);
    return make_gaussian_out(out[0], out[1]);
  }

  double state_value(std::span<const double> obs) const {
    return mlp_forward(value, obs)[0];
  }
};

inline RunRecord ac_pba_episode(Environment& env, GaussianActorCritic& agent, const ACConfig& cfg,
                                RngStream& rng, int episode_index = 0, std::uint64_t seed = 0,
                                std::vector<AcStepRecord>* trace = nullptr) {
  require(!env.discrete(), "ac_pba_episode: Gaussian agent needs a continuous environment");
  cfg.validate();
  const ShapingMode mode = cfg.scheme.mode;
  const bool pba = mode == ShapingMode::look_ahead_pba || mode == ShapingMode::look_back_pba;

  Observation s = env.reset(rng);
  MlpCache pcache;
  GaussianPolicyOut head = agent.head(s.coords, pcache);
  ActionValue a = ActionValue::continuous(gaussian_sample(head, rng));
  double phi_cur = pba ? cfg.scheme.action_potential(s, a) : 0.0;
  double phi_prev = 0.0;
  bool first_step = true;

  std::vector<double> policy_grads, value_grads;
  double ret = 0.0;
  int steps = 0;
  bool success = false;
  for (int t = 0; t < env.max_steps(); ++t) {
    StepOutcome out = env.step(a, rng);
    ret += out.reward;
    ++steps;

    MlpCache vcache;
    const double v_s = mlp_forward(agent.value, s.coords, vcache)[0];
    const double bootstrap = out.terminal ? 0.0 : agent.state_value(out.s_next.coords);

    std::optional<ActionValue> a_next;
    double phi_next = 0.0;
    if (mode == ShapingMode::look_ahead_pba && !out.terminal) {
      MlpCache next_pcache;
      GaussianPolicyOut next_head = agent.head(out.s_next.coords, next_pcache);
      a_next = ActionValue::continuous(gaussian_sample(next_head, rng));
      phi_next = cfg.scheme.action_potential(out.s_next, *a_next);
    }

    double delta = 0.0;
    double actor_coeff = 0.0;
    switch (mode) {
      case ShapingMode::none: {
        delta = out.reward + cfg.gamma * bootstrap - v_s;
        actor_coeff = delta;
        break;
      }
      case ShapingMode::pbrs: {
        double f = pbrs_bonus(cfg.scheme, s, out.s_next, out.terminal, cfg.gamma);
        delta = out.reward + f + cfg.gamma * bootstrap - v_s;
        actor_coeff = delta;
        break;
      }
      case ShapingMode::look_ahead_pba: {
        double target = out.reward + cfg.gamma * phi_next + cfg.gamma * bootstrap - v_s;
        delta = target - phi_cur;
        actor_coeff = delta + phi_cur;
        break;
      }
      case ShapingMode::look_back_pba: {
        double f = phi_cur - (first_step ? 0.0 : phi_prev / cfg.gamma);
        delta = out.reward + f + cfg.gamma * bootstrap - v_s;
        actor_coeff = delta;
        break;
      }
    }
    detail::check_finite_delta(delta, episode_index, t, mode);

    // Actor: Adam minimizes, so feed the negative ascent gradient. The clamp
    // on log_std blocks its gradient outside the active range.
    GaussianScore score = gaussian_log_prob_grad(head, a.scalar);
    double raw_log_std = pcache.act.back()[1];
    bool std_active = raw_log_std > kLogStdMin && raw_log_std < kLogStdMax;
    double up_mean = -actor_coeff * score.d_mean;
    double up_log_std = std_active ? -actor_coeff * score.d_log_std : 0.0;
    if (cfg.entropy_bonus > 0.0 && std_active) up_log_std -= cfg.entropy_bonus;
    const double upstream_p[2] = {up_mean, up_log_std};
    mlp_backward(agent.policy, pcache, upstream_p, policy_grads);
    adam_step(agent.policy_opt, agent.policy.params(), policy_grads, cfg.alpha_theta);

    // Critic: gradient of 0.5 * delta^2 w.r.t. omega is -delta * grad V.
    const double sign = cfg.inverted_critic_sign ? -1.0 : 1.0;
    const double upstream_v[1] = {-sign * delta};
    mlp_backward(agent.value, vcache, upstream_v, value_grads);
    adam_step(agent.value_opt, agent.value.params(), value_grads, cfg.alpha_omega);

    if (trace) trace->push_back({out.reward, phi_cur, phi_next, bootstrap, v_s, delta});

    phi_prev = phi_cur;
    first_step = false;
    if (out.terminal) {
      success = true;
      break;
    }
    s = out.s_next;
    head = agent.head(s.coords, pcache);  // fresh cache under the updated parameters
    if (mode == ShapingMode::look_ahead_pba) {
      a = *a_next;
      phi_cur = phi_next;
    } else {
      a = ActionValue::continuous(gaussian_sample(head, rng));
      phi_cur = pba ? cfg.scheme.action_potential(s, a) : 0.0;
    }
  }
  return {episode_index, seed, to_string(mode), ret, steps, success};
}

inline constexpr std::uint64_t kInitStreamTag = 0x696e6974;  // parameter init
inline constexpr std::uint64_t kEvalStreamTag = 0x6576616c;  // policy evaluation rollouts

inline std::vector<RunRecord> run_ac_gridworld(const GridConfig& env_cfg, const ACConfig& cfg,
                                               std::uint64_t seed,
                                               TabularSoftmaxPolicy* out_policy = nullptr,
                                               TabularCritic* out_critic = nullptr) {
  PuddleJumpGrid env(env_cfg);
  TabularSoftmaxPolicy policy(env.observation_count(), env.action_count());
  TabularCritic critic(env.observation_count());
  std::vector<RunRecord> records;
  records.reserve(cfg.t_max);
  for (int ep = 0; ep < cfg.t_max; ++ep) {
    RngStream rng = RngStream::derive(seed, {std::uint64_t(ep)});
    records.push_back(ac_pba_episode(env, policy, critic, cfg, rng, ep, seed));
  }
  if (out_policy) *out_policy = std::move(policy);
  if (out_critic) *out_critic = std::move(critic);
  return records;
}

// Evaluation rollouts for the mountain car use the deterministic mean action
// and uniform starts so the goal attractor and the valley attractor separate
// cleanly.
inline int car_eval_successes(MountainCar& env, const GaussianActorCritic& agent,
                              std::uint64_t seed, int rollouts = 10) {
  CarConfig eval_cfg = env.config();
  eval_cfg.uniform_start = true;
  MountainCar eval_env(eval_cfg);
  int successes = 0;
  for (int i = 0; i < rollouts; ++i) {
    RngStream rng = RngStream::derive(seed, {kEvalStreamTag, std::uint64_t(i)});
    Observation s = eval_env.reset(rng);
    for (int t = 0; t < eval_env.max_steps(); ++t) {
      MlpCache cache;
      GaussianPolicyOut head = agent.head(s.coords, cache);
      StepOutcome out = eval_env.step(ActionValue::continuous(head.mean), rng);
      if (out.terminal) {
        ++successes;
        break;
      }
      s = out.s_next;
    }
  }
  return successes;
}

struct CarRunResult {
  std::vector<RunRecord> records;
  bool converged = false;
};

inline CarRunResult run_ac_car(const CarConfig& env_cfg, const ACConfig& cfg, std::uint64_t seed) {
  MountainCar env(env_cfg);
  RngStream init_rng = RngStream::derive(seed, {kInitStreamTag});
  GaussianActorCritic agent(env.observation_dim(), cfg, init_rng);
  CarRunResult result;
  result.records.reserve(cfg.t_max);
  for (int ep = 0; ep < cfg.t_max; ++ep) {
    RngStream rng = RngStream::derive(seed, {std::uint64_t(ep)});
    result.records.push_back(ac_pba_episode(env, agent, cfg, rng, ep, seed));
  }
  result.converged = car_eval_successes(env, agent, seed) >= 9;
  return result;
}

// Norm of sum_a pi(a|s) * grad log pi(a|s); exactly zero for any softmax row.
inline double score_zero_mean_check(const TabularSoftmaxPolicy& policy, int obs) {
  std::vector<double> probs = softmax_probs(policy, obs);
  std::vector<double> acc(probs.size(), 0.0);
  for (int a = 0; a < int(probs.size()); ++a) {
    std::vector<double> g = grad_log_softmax(policy, obs, a);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += probs[a] * g[i];
  }
  double norm = 0.0;
  for (double x : acc) norm += x * x;
  return std::sqrt(norm);
}

// Monte Carlo estimate of E_a[grad log N(a; mean, std^2)] over n samples;
// returns the norm of the estimated mean score.
inline double score_zero_mean_check(const GaussianPolicyOut& out, int n_samples, RngStream& rng) {
  double sum_mean = 0.0, sum_log_std = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    double a = gaussian_sample(out, rng);
    GaussianScore score = gaussian_log_prob_grad(out, a);
    sum_mean += score.d_mean;
    sum_log_std += score.d_log_std;
  }
  double m1 = sum_mean / n_samples;
  double m2 = sum_log_std / n_samples;
  return std::sqrt(m1 * m1 + m2 * m2);
}

}  // namespace shaperl
