#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "shaperl/actor_critic.hpp"
#include "shaperl/gridworld.hpp"
#include "shaperl/mlp.hpp"
#include "shaperl/oracle.hpp"
#include "shaperl/shaping.hpp"
#include "shaperl/soft_q.hpp"

namespace shaperl {

// One measured property with its pinned tolerance.
struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

namespace checks {

inline CheckResult result(const std::string& name, double measured, double tolerance,
                          const std::string& detail = "") {
  return {name, measured <= tolerance, measured, tolerance, detail};
}

// Relative error between two gradient vectors, in the norm sense.
inline double gradient_rel_error(std::span<const double> analytic, std::span<const double> fd) {
  double diff = 0.0, na = 0.0, nf = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
    na += analytic[i] * analytic[i];
    nf += fd[i] * fd[i];
  }
  double denom = std::sqrt(na) + std::sqrt(nf);
  return std::sqrt(diff) / std::max(denom, 1e-12);
}

// PBRS telescoping over random trajectories:
// sum_t gamma^t F_t = gamma^T phi(s_T) - phi(s_0).
inline std::vector<CheckResult> telescoping() {
  RngStream rng(20240811);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_states = 10;
    std::vector<double> phi(n_states);
    for (double& x : phi) x = rng.uniform(-10.0, 10.0);
    PotentialScheme scheme;
    scheme.mode = ShapingMode::pbrs;
    scheme.phi_s = [&phi](const Observation& s) { return phi.at(s.id); };

    double gammas[4] = {1.0, 0.99, 0.9, rng.uniform(0.1, 1.0)};
    double gamma = gammas[trial % 4];
    int steps = 1 + rng.uniform_int(40);
    std::vector<int> states(steps + 1);
    for (int& s : states) s = rng.uniform_int(n_states);
    bool last_terminal = trial % 2 == 0;

    double shaped_sum = 0.0;
    double factor = 1.0;
    for (int t = 0; t < steps; ++t) {
      bool terminal = last_terminal && t == steps - 1;
      shaped_sum += factor * pbrs_bonus(scheme, Observation::discrete(states[t]),
                                        Observation::discrete(states[t + 1]), terminal, gamma);
      factor *= gamma;
    }
    double tail = last_terminal ? 0.0 : factor * phi[states[steps]];
    worst = std::max(worst, std::abs(shaped_sum - (tail - phi[states[0]])));
  }
  return {result("telescoping", worst, 1e-9, "1000 random trajectories")};
}

// Objective shift under PBRS: J_M'(pi) = J_M(pi) - E_rho0[phi(s0)], so the
// maximizing policy over any finite set is unchanged.
inline std::vector<CheckResult> objective_shift() {
  RngStream rng(7151);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    TabularMDP mdp = random_mdp(4, 3, 0.9, rng);
    std::vector<double> phi(mdp.n_states);
    for (double& x : phi) x = rng.uniform(-5.0, 5.0);
    PotentialScheme scheme;
    scheme.mode = ShapingMode::pbrs;
    scheme.phi_s = [&phi](const Observation& s) { return phi.at(s.id); };
    double phi0 = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) phi0 += mdp.rho0[s] * phi[s];
    for (int p = 0; p < 20; ++p) {
      std::vector<double> policy = random_stochastic_policy(mdp.n_states, mdp.n_actions, rng);
      double j_shaped = policy_objective(mdp, policy, scheme);
      double j_plain = policy_objective(mdp, policy, PotentialScheme{});
      worst = std::max(worst, std::abs(j_shaped - (j_plain - phi0)));
    }
  }
  return {result("objective-shift", worst, 1e-8, "50 MDPs x 20 policies")};
}

// Shaping-vs-initialization equivalence of tabular soft Q-learning: the PBRS
// agent and the phi-initialized unshaped agent accumulate identical Q-changes
// on a shared experience stream.
inline std::vector<CheckResult> learnability() {
  double worst = 0.0;
  RngStream rng(99121);
  GridConfig grid_cfg;
  SoftQConfig cfg;
  cfg.gamma = 1.0;
  for (int trial = 0; trial < 5; ++trial) {
    PuddleJumpGrid env(grid_cfg);
    std::vector<double> phi(env.observation_count());
    for (double& x : phi) x = rng.uniform(-10.0, 10.0);
    QTable q0(env.observation_count(), env.action_count(), 0.0);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      worst = std::max(worst, learnability_experiment(env, phi, q0, cfg, 10000, seed));
    }
  }
  return {result("learnability", worst, 1e-9, "5 potentials x 3 seeds, 10k lock-step updates")};
}

// Q^pi_M = Q^pi_M' + phi(s, a) for look-ahead advice, with the two sides
// evaluated independently.
inline std::vector<CheckResult> eq3_identity() {
  RngStream rng(40903);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    TabularMDP mdp = random_mdp(5, 3, 0.9, rng);
    std::vector<double> phi(std::size_t(mdp.n_states) * mdp.n_actions);
    for (double& x : phi) x = rng.uniform(-1.0, 1.0);
    PotentialScheme scheme;
    scheme.mode = ShapingMode::look_ahead_pba;
    scheme.phi_sa = [&phi, &mdp](const Observation& s, const ActionValue& a) {
      return phi.at(std::size_t(s.id) * mdp.n_actions + a.index);
    };
    std::vector<double> policy = random_stochastic_policy(mdp.n_states, mdp.n_actions, rng);
    std::vector<double> q_m = policy_evaluation(mdp, policy, PotentialScheme{});
    std::vector<double> q_mp = policy_evaluation(mdp, policy, scheme);
    for (std::size_t i = 0; i < q_m.size(); ++i) {
      worst = std::max(worst, std::abs(q_m[i] - (q_mp[i] + phi[i])));
    }
  }
  return {result("eq3", worst, 1e-6, "100 random MDPs, look-ahead advice")};
}

// PBRS leaves the optimal greedy policy unchanged and shifts the optimal Q
// table by exactly phi(s).
inline std::vector<CheckResult> greedy_invariance() {
  RngStream rng(5150);
  double worst = 0.0;
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    TabularMDP mdp = random_mdp(5, 3, 0.9, rng);
    std::vector<double> phi(mdp.n_states);
    for (double& x : phi) x = rng.uniform(-2.0, 2.0);
    PotentialScheme scheme;
    scheme.mode = ShapingMode::pbrs;
    scheme.phi_s = [&phi](const Observation& s) { return phi.at(s.id); };
    ValueIterationResult plain = value_iteration(mdp, PotentialScheme{});
    ValueIterationResult shaped = value_iteration(mdp, scheme);
    for (int s = 0; s < mdp.n_states; ++s) {
      if (plain.greedy[s] != shaped.greedy[s]) ++mismatches;
      for (int a = 0; a < mdp.n_actions; ++a) {
        std::size_t i = std::size_t(s) * mdp.n_actions + a;
        worst = std::max(worst, std::abs(shaped.q[i] - (plain.q[i] - phi[s])));
      }
    }
  }
  CheckResult r = result("greedy-invariance", worst, 1e-8, "100 random MDPs");
  if (mismatches > 0) {
    r.pass = false;
    r.detail += " (" + std::to_string(mismatches) + " greedy mismatches)";
  }
  return {r};
}

// Fixed deterministic-transition 4-state MDP for the sampled-learning
// comparison against the brute-force soft fixed point.
inline TabularMDP soft_fixed_point_mdp() {
  RngStream rng(311);
  TabularMDP mdp(4, 2, 0.9);
  for (int s = 0; s < 4; ++s) {
    mdp.t(s, 0, (s + 1) % 4) = 1.0;
    mdp.t(s, 1, (s + 2) % 4) = 1.0;
    mdp.r(s, 0) = rng.uniform(-1.0, 1.0);
    mdp.r(s, 1) = rng.uniform(-1.0, 1.0);
  }
  return mdp;
}

inline std::vector<CheckResult> soft_fixed_point() {
  TabularMDP mdp = soft_fixed_point_mdp();
  std::vector<double> q_star = soft_q_fixed_point(mdp);
  TabularMdpEnv env(mdp, 1000);
  SoftQConfig cfg;
  cfg.gamma = mdp.gamma;
  SoftQResult learned = train_soft_q(env, PotentialScheme{}, cfg, 2000, 17);
  double worst = 0.0;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      worst = std::max(worst, std::abs(learned.q(s, a) - q_star[std::size_t(s) * mdp.n_actions + a]));
    }
  }
  return {result("soft-fixed-point", worst, 1e-3, "4-state MDP, 2e6 sampled updates")};
}

// E_a[grad log pi] = 0: exact for tabular softmax rows, within Monte Carlo
// error for the Gaussian policy head.
inline std::vector<CheckResult> score_zero_mean() {
  RngStream rng(61409);
  double worst_tab = 0.0;
  TabularSoftmaxPolicy policy(1, 5);
  for (int trial = 0; trial < 1000; ++trial) {
    for (double& t : policy.theta) t = rng.uniform(-30.0, 30.0);
    worst_tab = std::max(worst_tab, score_zero_mean_check(policy, 0));
  }

  GaussianPolicyOut head = make_gaussian_out(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 1.0));
  const int n = 1000000;
  double s1 = 0.0, s2 = 0.0, sq1 = 0.0, sq2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = gaussian_sample(head, rng);
    GaussianScore score = gaussian_log_prob_grad(head, a);
    s1 += score.d_mean;
    s2 += score.d_log_std;
    sq1 += score.d_mean * score.d_mean;
    sq2 += score.d_log_std * score.d_log_std;
  }
  double m1 = s1 / n, m2 = s2 / n;
  double se1 = std::sqrt((sq1 / n - m1 * m1) / n);
  double se2 = std::sqrt((sq2 / n - m2 * m2) / n);
  double z = std::max(std::abs(m1) / se1, std::abs(m2) / se2);

  return {result("score-zero-mean/tabular", worst_tab, 1e-12, "1000 random theta rows"),
          result("score-zero-mean/gaussian", z, 3.0, "1e6 samples, units of standard error")};
}

// Central-difference validation of every analytic gradient path.
inline std::vector<CheckResult> grad_check() {
  RngStream rng(271828);
  const double h = 1e-6;

  double worst_mlp = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> sizes{1 + rng.uniform_int(4)};
    int hidden_layers = 1 + rng.uniform_int(2);
    for (int l = 0; l < hidden_layers; ++l) sizes.push_back(2 + rng.uniform_int(7));
    sizes.push_back(1 + rng.uniform_int(3));
    Mlp net(sizes, rng);
    std::vector<double> input(net.input_dim());
    for (double& x : input) x = rng.uniform(-1.0, 1.0);
    std::vector<double> upstream(net.output_dim());
    for (double& x : upstream) x = rng.uniform(-1.0, 1.0);

    MlpCache cache;
    mlp_forward(net, input, cache);
    std::vector<double> analytic;
    mlp_backward(net, cache, upstream, analytic);

    auto loss = [&]() {
      auto out = mlp_forward(net, input);
      double acc = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) acc += upstream[i] * out[i];
      return acc;
    };
    std::vector<double> fd(net.param_count());
    for (int i = 0; i < net.param_count(); ++i) {
      double saved = net.params()[i];
      net.params()[i] = saved + h;
      double up = loss();
      net.params()[i] = saved - h;
      double down = loss();
      net.params()[i] = saved;
      fd[i] = (up - down) / (2.0 * h);
    }
    worst_mlp = std::max(worst_mlp, gradient_rel_error(analytic, fd));
  }

  double worst_head = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    GaussianPolicyOut head = make_gaussian_out(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 0.5));
    double a = head.mean + head.std_dev() * rng.normal();
    GaussianScore analytic = gaussian_log_prob_grad(head, a);
    double fd_mean = (gaussian_log_prob({head.mean + h, head.log_std}, a) -
                      gaussian_log_prob({head.mean - h, head.log_std}, a)) /
                     (2.0 * h);
    double fd_log_std = (gaussian_log_prob({head.mean, head.log_std + h}, a) -
                         gaussian_log_prob({head.mean, head.log_std - h}, a)) /
                        (2.0 * h);
    double an[2] = {analytic.d_mean, analytic.d_log_std};
    double fd[2] = {fd_mean, fd_log_std};
    worst_head = std::max(worst_head, gradient_rel_error(an, fd));
  }

  // Full path: d log pi(a|s) / d policy-net parameters through the clamped
  // log_std head.
  double worst_path = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    Mlp net({2, 8, 2}, rng);
    std::vector<double> input{rng.uniform(-1.0, 1.0), rng.uniform(-0.1, 0.1)};
    MlpCache cache;
    auto raw = mlp_forward(net, input, cache);
    GaussianPolicyOut head = make_gaussian_out(raw[0], raw[1]);
    double a = head.mean + head.std_dev() * rng.normal();

    GaussianScore score = gaussian_log_prob_grad(head, a);
    bool active = raw[1] > kLogStdMin && raw[1] < kLogStdMax;
    std::vector<double> upstream{score.d_mean, active ? score.d_log_std : 0.0};
    std::vector<double> analytic;
    mlp_backward(net, cache, upstream, analytic);

    auto log_prob = [&]() {
      auto out = mlp_forward(net, input);
      return gaussian_log_prob(make_gaussian_out(out[0], out[1]), a);
    };
    std::vector<double> fd(net.param_count());
    for (int i = 0; i < net.param_count(); ++i) {
      double saved = net.params()[i];
      net.params()[i] = saved + h;
      double up = log_prob();
      net.params()[i] = saved - h;
      double down = log_prob();
      net.params()[i] = saved;
      fd[i] = (up - down) / (2.0 * h);
    }
    worst_path = std::max(worst_path, gradient_rel_error(analytic, fd));
  }

  return {result("grad-check/mlp", worst_mlp, 1e-5, "100 random nets"),
          result("grad-check/gaussian-head", worst_head, 1e-5, "100 random heads"),
          result("grad-check/policy-path", worst_path, 1e-5, "30 random policy nets")};
}

// Look-ahead unbiasedness algebra: delta_t + phi(s_t, a_t) equals the
// phi-free estimated return r + gamma*phi(s', a') + gamma*R - V(s) at every
// recorded step.
inline std::vector<CheckResult> lookahead_algebra() {
  double worst = 0.0;
  {
    GridConfig grid_cfg;
    PuddleJumpGrid env(grid_cfg);
    ACConfig cfg;
    cfg.scheme = grid_potential_scheme(ShapingMode::look_ahead_pba, 0.0, 5.0, 5.0, grid_cfg);
    cfg.t_max = 5;
    TabularSoftmaxPolicy policy(env.observation_count(), env.action_count());
    TabularCritic critic(env.observation_count());
    for (int ep = 0; ep < cfg.t_max; ++ep) {
      std::vector<AcStepRecord> trace;
      RngStream rng = RngStream::derive(4242, {std::uint64_t(ep)});
      ac_pba_episode(env, policy, critic, cfg, rng, ep, 4242, &trace);
      for (const AcStepRecord& step : trace) {
        double rhs = step.r + cfg.gamma * step.phi_next + cfg.gamma * step.bootstrap - step.v_s;
        worst = std::max(worst, std::abs((step.delta + step.phi_cur) - rhs));
      }
    }
  }
  {
    CarConfig car_cfg;
    car_cfg.max_steps = 200;
    MountainCar env(car_cfg);
    ACConfig cfg;
    cfg.scheme = car_potential_scheme(ShapingMode::look_ahead_pba);
    cfg.alpha_theta = 1e-5;
    cfg.alpha_omega = 5.6e-4;
    cfg.gamma = 0.99;
    cfg.t_max = 3;
    cfg.policy_hidden = {16};
    cfg.value_hidden = {16};
    RngStream init_rng = RngStream::derive(4243, {kInitStreamTag});
    GaussianActorCritic agent(env.observation_dim(), cfg, init_rng);
    for (int ep = 0; ep < cfg.t_max; ++ep) {
      std::vector<AcStepRecord> trace;
      RngStream rng = RngStream::derive(4243, {std::uint64_t(ep)});
      ac_pba_episode(env, agent, cfg, rng, ep, 4243, &trace);
      for (const AcStepRecord& step : trace) {
        double rhs = step.r + cfg.gamma * step.phi_next + cfg.gamma * step.bootstrap - step.v_s;
        worst = std::max(worst, std::abs((step.delta + step.phi_cur) - rhs));
      }
    }
  }
  return {result("lookahead-algebra", worst, 1e-12, "recorded gridworld and car steps")};
}

}  // namespace checks

inline std::vector<std::string> check_suite_names() {
  return {"telescoping", "objective-shift", "learnability",   "eq3",
          "greedy-invariance", "soft-fixed-point", "score-zero-mean", "grad-check",
          "lookahead-algebra"};
}

inline std::vector<CheckResult> run_check_suite(const std::string& name) {
  if (name == "telescoping") return checks::telescoping();
  if (name == "objective-shift") return checks::objective_shift();
  if (name == "learnability") return checks::learnability();
  if (name == "eq3") return checks::eq3_identity();
  if (name == "greedy-invariance") return checks::greedy_invariance();
  if (name == "soft-fixed-point") return checks::soft_fixed_point();
  if (name == "score-zero-mean") return checks::score_zero_mean();
  if (name == "grad-check") return checks::grad_check();
  if (name == "lookahead-algebra") return checks::lookahead_algebra();
  if (name == "all") {
    std::vector<CheckResult> all;
    for (const std::string& suite : check_suite_names()) {
      for (CheckResult& r : run_check_suite(suite)) all.push_back(std::move(r));
    }
    return all;
  }
  throw std::invalid_argument("unknown check suite: " + name);
}

}  // namespace shaperl
