#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "shaperl/actor_critic.hpp"
#include "shaperl/core.hpp"
#include "shaperl/gridworld.hpp"
#include "shaperl/mountain_car.hpp"
#include "shaperl/shaping.hpp"
#include "shaperl/soft_q.hpp"

namespace shaperl {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Experiment description read from a JSON config file. Unknown keys are
// rejected so typos cannot silently fall back to defaults.
struct ExperimentConfig {
  std::string domain;       // "gridworld" | "mountain_car"
  std::string agent = "ac";  // "ac" | "soft_q"
  std::vector<std::string> schemes;
  std::vector<std::uint64_t> seeds;
  int episodes = 300;
  int smoothing_window = 10;
  GridConfig grid;
  CarConfig car;
  ACConfig ac;
  SoftQConfig soft_q;
  double u0 = 0.0, u1 = 5.0, kappa = 5.0;  // gridworld potential parameters
};

namespace cfgdetail {

inline void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                       const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown config field: " + context + it.key());
  }
}

template <typename T>
inline void read_field(const nlohmann::json& obj, const char* key, T& out,
                       const std::string& context) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("invalid value for config field: " + context + key);
  }
}

}  // namespace cfgdetail

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  using cfgdetail::check_keys;
  using cfgdetail::read_field;

  check_keys(j,
             {"domain", "agent", "schemes", "seeds", "episodes", "smoothing_window", "env",
              "agent_params", "potential"},
             "");
  ExperimentConfig cfg;
  read_field(j, "domain", cfg.domain, "");
  if (cfg.domain != "gridworld" && cfg.domain != "mountain_car") {
    throw ConfigError("invalid value for config field: domain");
  }
  read_field(j, "agent", cfg.agent, "");
  if (cfg.agent != "ac" && cfg.agent != "soft_q") {
    throw ConfigError("invalid value for config field: agent");
  }
  if (cfg.agent == "soft_q" && cfg.domain != "gridworld") {
    throw ConfigError("invalid value for config field: agent (soft_q needs a discrete domain)");
  }
  read_field(j, "schemes", cfg.schemes, "");
  if (cfg.schemes.empty()) throw ConfigError("invalid value for config field: schemes (empty)");
  for (const auto& s : cfg.schemes) {
    ShapingMode mode = shaping_mode_from_string(s);  // throws on unknown tags
    if (cfg.agent == "soft_q" && mode != ShapingMode::none && mode != ShapingMode::pbrs) {
      throw ConfigError("invalid value for config field: schemes (soft_q supports none/pbrs)");
    }
  }
  for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);  // default: ten seeds
  if (j.contains("seeds")) {
    cfg.seeds.clear();
    read_field(j, "seeds", cfg.seeds, "");
  }
  if (cfg.seeds.empty()) throw ConfigError("invalid value for config field: seeds (empty)");
  read_field(j, "episodes", cfg.episodes, "");
  if (cfg.episodes < 0) throw ConfigError("invalid value for config field: episodes");
  read_field(j, "smoothing_window", cfg.smoothing_window, "");
  if (cfg.smoothing_window < 1) {
    throw ConfigError("invalid value for config field: smoothing_window");
  }

  // Per-domain default learning rates; overridable below.
  if (cfg.domain == "gridworld") {
    cfg.ac.alpha_theta = 0.2;
    cfg.ac.alpha_omega = 0.001;
    cfg.ac.gamma = 1.0;
  } else {
    cfg.ac.alpha_theta = 1e-5;
    cfg.ac.alpha_omega = 5.6e-4;
    cfg.ac.gamma = 0.99;
  }

  if (j.contains("env")) {
    const auto& env = j.at("env");
    if (cfg.domain == "gridworld") {
      check_keys(env, {"size", "p_jump", "step_reward", "goal_reward", "max_steps"}, "env.");
      read_field(env, "size", cfg.grid.size, "env.");
      cfg.grid.goal = {cfg.grid.size - 1, cfg.grid.size - 1};
      read_field(env, "p_jump", cfg.grid.p_jump, "env.");
      read_field(env, "step_reward", cfg.grid.step_reward, "env.");
      read_field(env, "goal_reward", cfg.grid.goal_reward, "env.");
      read_field(env, "max_steps", cfg.grid.max_steps, "env.");
      cfg.grid.validate();
    } else {
      check_keys(env,
                 {"goal_position", "force_coeff", "gravity_coeff", "goal_reward", "max_steps",
                  "uniform_start"},
                 "env.");
      read_field(env, "goal_position", cfg.car.goal_position, "env.");
      read_field(env, "force_coeff", cfg.car.force_coeff, "env.");
      read_field(env, "gravity_coeff", cfg.car.gravity_coeff, "env.");
      read_field(env, "goal_reward", cfg.car.goal_reward, "env.");
      read_field(env, "max_steps", cfg.car.max_steps, "env.");
      read_field(env, "uniform_start", cfg.car.uniform_start, "env.");
      cfg.car.validate();
    }
  }

  if (j.contains("agent_params")) {
    const auto& ap = j.at("agent_params");
    if (cfg.agent == "ac") {
      check_keys(ap,
                 {"alpha_theta", "alpha_omega", "gamma", "entropy_bonus", "inverted_critic_sign",
                  "policy_hidden", "value_hidden"},
                 "agent_params.");
      read_field(ap, "alpha_theta", cfg.ac.alpha_theta, "agent_params.");
      read_field(ap, "alpha_omega", cfg.ac.alpha_omega, "agent_params.");
      read_field(ap, "gamma", cfg.ac.gamma, "agent_params.");
      read_field(ap, "entropy_bonus", cfg.ac.entropy_bonus, "agent_params.");
      read_field(ap, "inverted_critic_sign", cfg.ac.inverted_critic_sign, "agent_params.");
      read_field(ap, "policy_hidden", cfg.ac.policy_hidden, "agent_params.");
      read_field(ap, "value_hidden", cfg.ac.value_hidden, "agent_params.");
      cfg.ac.validate();
    } else {
      check_keys(ap, {"alpha", "lr0", "lr_decay", "gamma", "q_init"}, "agent_params.");
      read_field(ap, "alpha", cfg.soft_q.alpha, "agent_params.");
      read_field(ap, "lr0", cfg.soft_q.lr0, "agent_params.");
      read_field(ap, "lr_decay", cfg.soft_q.lr_decay, "agent_params.");
      read_field(ap, "gamma", cfg.soft_q.gamma, "agent_params.");
      read_field(ap, "q_init", cfg.soft_q.q_init, "agent_params.");
      cfg.soft_q.validate();
    }
  }

  if (j.contains("potential")) {
    const auto& pot = j.at("potential");
    check_keys(pot, {"u0", "u1", "kappa"}, "potential.");
    read_field(pot, "u0", cfg.u0, "potential.");
    read_field(pot, "u1", cfg.u1, "potential.");
    read_field(pot, "kappa", cfg.kappa, "potential.");
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

struct RunSummary {
  std::string scheme;
  std::uint64_t seed = 0;
  bool converged = false;
};

struct ExperimentResult {
  std::vector<RunRecord> records;
  std::vector<RunSummary> runs;
};

namespace detail {

inline bool trailing_success(const std::vector<RunRecord>& records, int window = 10) {
  if (records.empty()) return false;
  int n = int(records.size());
  int lo = std::max(0, n - window);
  int ok = 0;
  for (int i = lo; i < n; ++i) ok += records[i].success ? 1 : 0;
  return ok * 10 >= (n - lo) * 9;
}

inline std::pair<std::vector<RunRecord>, bool> execute_run(const ExperimentConfig& cfg,
                                                           const std::string& scheme_str,
                                                           std::uint64_t seed) {
  ShapingMode mode = shaping_mode_from_string(scheme_str);
  if (cfg.domain == "gridworld") {
    PotentialScheme scheme = grid_potential_scheme(mode, cfg.u0, cfg.u1, cfg.kappa, cfg.grid);
    if (cfg.agent == "ac") {
      ACConfig ac = cfg.ac;
      ac.scheme = scheme;
      ac.t_max = cfg.episodes;
      auto records = run_ac_gridworld(cfg.grid, ac, seed);
      bool converged = trailing_success(records);
      return {std::move(records), converged};
    }
    PuddleJumpGrid env(cfg.grid);
    SoftQResult res = train_soft_q(env, scheme, cfg.soft_q, cfg.episodes, seed);
    bool converged = trailing_success(res.records);
    return {std::move(res.records), converged};
  }
  PotentialScheme scheme = car_potential_scheme(mode);
  ACConfig ac = cfg.ac;
  ac.scheme = scheme;
  ac.t_max = cfg.episodes;
  CarRunResult res = run_ac_car(cfg.car, ac, seed);
  return {std::move(res.records), res.converged};
}

}  // namespace detail

// Executes the full scheme x seed cross product. Runs are independent, so a
// worker pool of `jobs` threads picks them up; record order is deterministic
// regardless of scheduling.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                                       std::uint64_t seed_offset = 0) {
  struct RunSpec {
    std::string scheme;
    std::uint64_t seed;
  };
  std::vector<RunSpec> specs;
  for (const auto& scheme : cfg.schemes) {
    for (std::uint64_t seed : cfg.seeds) specs.push_back({scheme, seed + seed_offset});
  }

  std::vector<std::vector<RunRecord>> slots(specs.size());
  std::vector<RunSummary> summaries(specs.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= specs.size()) return;
      auto [records, converged] = detail::execute_run(cfg, specs[i].scheme, specs[i].seed);
      slots[i] = std::move(records);
      summaries[i] = {specs[i].scheme, specs[i].seed, converged};
    }
  };
  int n_workers = std::max(1, std::min<int>(jobs, int(specs.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.runs = std::move(summaries);
  for (auto& slot : slots) {
    result.records.insert(result.records.end(), slot.begin(), slot.end());
  }
  return result;
}

// ---- aggregation ----

struct Curve {
  std::string scheme;
  std::vector<double> mean;
  std::vector<double> stdev;
};

// Trailing moving average; the first entries average whatever prefix exists,
// so the curve keeps the episode count.
inline std::vector<double> trailing_mean(const std::vector<double>& xs, int window) {
  std::vector<double> out(xs.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    acc += xs[i];
    if (int(i) >= window) acc -= xs[i - window];
    out[i] = acc / double(std::min<int>(window, int(i) + 1));
  }
  return out;
}

// Per-episode mean and std across seeds, then a trailing moving average of
// length `window` over both.
inline std::vector<Curve> aggregate_curves(const std::vector<RunRecord>& records, int window) {
  require(window >= 1, "aggregate_curves: window must be >= 1");
  std::vector<Curve> curves;
  std::vector<std::vector<std::vector<double>>> buckets;  // [scheme][episode][runs]
  auto scheme_index = [&](const std::string& scheme) {
    for (std::size_t i = 0; i < curves.size(); ++i) {
      if (curves[i].scheme == scheme) return i;
    }
    curves.push_back({scheme, {}, {}});
    buckets.emplace_back();
    return curves.size() - 1;
  };
  for (const RunRecord& r : records) {
    std::size_t i = scheme_index(r.scheme);
    if (int(buckets[i].size()) <= r.episode) buckets[i].resize(r.episode + 1);
    buckets[i][r.episode].push_back(r.ret);
  }
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::vector<double> mean(buckets[i].size(), 0.0), stdev(buckets[i].size(), 0.0);
    for (std::size_t e = 0; e < buckets[i].size(); ++e) {
      const auto& xs = buckets[i][e];
      if (xs.empty()) continue;
      double m = 0.0;
      for (double x : xs) m += x;
      m /= double(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - m) * (x - m);
      mean[e] = m;
      stdev[e] = std::sqrt(var / double(xs.size()));
    }
    curves[i].mean = trailing_mean(mean, window);
    curves[i].stdev = trailing_mean(stdev, window);
  }
  return curves;
}

// ---- p_j sweep (jump-difficulty study) ----

struct PjSweepResult {
  std::vector<double> pj_values;
  std::vector<std::string> schemes;
  std::vector<std::vector<double>> mean_first100;          // [pj][scheme]
  std::vector<std::vector<std::vector<double>>> per_seed;  // [pj][scheme][seed]
};

inline double mean_return_first_episodes(const std::vector<RunRecord>& records, int count = 100) {
  double acc = 0.0;
  int n = 0;
  for (const RunRecord& r : records) {
    if (r.episode < count) {
      acc += r.ret;
      ++n;
    }
  }
  return n > 0 ? acc / double(n) : 0.0;
}

inline PjSweepResult sweep_pj(const ExperimentConfig& cfg, const std::vector<double>& pj_values,
                              int jobs = 1, std::uint64_t seed_offset = 0) {
  require(cfg.domain == "gridworld", "sweep_pj: gridworld domain only");
  require(!pj_values.empty(), "sweep_pj: need at least one p_j value");
  PjSweepResult result;
  result.pj_values = pj_values;
  result.schemes = cfg.schemes;
  for (double pj : pj_values) {
    ExperimentConfig sub = cfg;
    sub.grid.p_jump = pj;
    sub.grid.validate();
    ExperimentResult runs = run_experiment(sub, jobs, seed_offset);
    std::vector<double> means;
    std::vector<std::vector<double>> seeds_row;
    for (const auto& scheme : cfg.schemes) {
      std::vector<double> per_seed;
      for (std::uint64_t seed : cfg.seeds) {
        std::vector<RunRecord> mine;
        for (const RunRecord& r : runs.records) {
          if (r.scheme == scheme && r.seed == seed + seed_offset) mine.push_back(r);
        }
        per_seed.push_back(mean_return_first_episodes(mine));
      }
      double m = 0.0;
      for (double x : per_seed) m += x;
      means.push_back(m / double(per_seed.size()));
      seeds_row.push_back(std::move(per_seed));
    }
    result.mean_first100.push_back(std::move(means));
    result.per_seed.push_back(std::move(seeds_row));
  }
  return result;
}

// ---- CSV ----

inline constexpr const char* kCsvVersionComment = "# shaperl records v1";
inline constexpr const char* kCsvHeader = "episode,seed,scheme,return,steps,success";

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open for writing: " + path);
  out << kCsvVersionComment << "\n" << kCsvHeader << "\n";
  for (const RunRecord& r : records) {
    out << r.episode << ',' << r.seed << ',' << r.scheme << ',' << format_double(r.ret) << ','
        << r.steps << ',' << (r.success ? 1 : 0) << "\n";
  }
  if (!out) throw std::runtime_error("emit_csv: write failed: " + path);
}

inline std::vector<RunRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv: cannot open: " + path);
  std::vector<RunRecord> records;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != kCsvHeader) throw std::runtime_error("parse_csv: bad header in " + path);
      saw_header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string field;
    RunRecord r;
    std::getline(ss, field, ',');
    r.episode = std::stoi(field);
    std::getline(ss, field, ',');
    r.seed = std::stoull(field);
    std::getline(ss, r.scheme, ',');
    std::getline(ss, field, ',');
    r.ret = std::stod(field);
    std::getline(ss, field, ',');
    r.steps = std::stoi(field);
    std::getline(ss, field, ',');
    r.success = field == "1";
    records.push_back(std::move(r));
  }
  if (!saw_header) throw std::runtime_error("parse_csv: missing header in " + path);
  return records;
}

inline void emit_sweep_csv(const PjSweepResult& sweep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_sweep_csv: cannot open for writing: " + path);
  out << "# shaperl pj-sweep v1\npj,scheme,mean_return_first100\n";
  for (std::size_t i = 0; i < sweep.pj_values.size(); ++i) {
    for (std::size_t k = 0; k < sweep.schemes.size(); ++k) {
      out << format_double(sweep.pj_values[i]) << ',' << sweep.schemes[k] << ','
          << format_double(sweep.mean_first100[i][k]) << "\n";
    }
  }
  if (!out) throw std::runtime_error("emit_sweep_csv: write failed: " + path);
}

// ---- SVG learning curves ----

inline void emit_svg(const std::vector<Curve>& curves, const std::string& path,
                     const std::string& title = "learning curves", int window = 1) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2"};
  const double width = 860, height = 520;
  const double left = 70, right = 660, top = 50, bottom = 470;

  double x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
  bool any = false;
  for (const Curve& c : curves) {
    if (c.mean.empty()) continue;
    x_max = std::max(x_max, double(c.mean.size() - 1));
    for (double y : c.mean) {
      y_min = any ? std::min(y_min, y) : y;
      y_max = any ? std::max(y_max, y) : y;
      any = true;
    }
  }
  if (!any) {
    y_min = 0.0;
    y_max = 1.0;
  }
  if (y_max - y_min < 1e-12) {
    y_max += 1.0;
    y_min -= 1.0;
  }
  double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto sx = [&](double e) { return left + (right - left) * (x_max > 0 ? e / x_max : 0.0); };
  auto sy = [&](double v) { return bottom - (bottom - top) * (v - y_min) / (y_max - y_min); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << title
      << "</text>\n";
  svg << "<text x=\"" << left << "\" y=\"42\" font-family=\"sans-serif\" font-size=\"11\" "
      << "fill=\"#555\">trailing mean, window=" << window << "</text>\n";

  // axes
  svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
      << bottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    double e = x_max * i / 5.0;
    double v = y_min + (y_max - y_min) * i / 5.0;
    char label[32];
    svg << "<line x1=\"" << sx(e) << "\" y1=\"" << bottom << "\" x2=\"" << sx(e) << "\" y2=\""
        << bottom + 5 << "\" stroke=\"black\"/>\n";
    std::snprintf(label, sizeof(label), "%.4g", e);
    svg << "<text x=\"" << sx(e) << "\" y=\"" << bottom + 18
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << label
        << "</text>\n";
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(v) << "\" x2=\"" << left << "\" y2=\""
        << sy(v) << "\" stroke=\"black\"/>\n";
    std::snprintf(label, sizeof(label), "%.4g", v);
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(v) + 3
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << label
        << "</text>\n";
  }
  svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 8
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">episode</text>\n";
  svg << "<text x=\"18\" y=\"" << (top + bottom) / 2
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 18 " << (top + bottom) / 2 << ")\">average return</text>\n";

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (!curves[c].mean.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t e = 0; e < curves[c].mean.size(); ++e) {
        svg << sx(double(e)) << ',' << sy(curves[c].mean[e]) << ' ';
      }
      svg << "\"/>\n";
    }
    double ly = top + 16 + 18 * double(c);
    svg << "<line x1=\"" << right + 18 << "\" y1=\"" << ly << "\" x2=\"" << right + 44 << "\" y2=\""
        << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << right + 50 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << curves[c].scheme << "</text>\n";
  }
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_svg: cannot open for writing: " + path);
  out << svg.str();
  if (!out) throw std::runtime_error("emit_svg: write failed: " + path);
}

}  // namespace shaperl
