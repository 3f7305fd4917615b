#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shaperl/shaperl.hpp"

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(std::stod(item));
  }
  return values;
}

void write_run_metadata(const shaperl::ExperimentConfig& cfg, const std::string& path) {
  nlohmann::json meta;
  meta["domain"] = cfg.domain;
  meta["agent"] = cfg.agent;
  meta["schemes"] = cfg.schemes;
  meta["seeds"] = cfg.seeds;
  meta["seed_count"] = cfg.seeds.size();
  meta["episodes"] = cfg.episodes;
  meta["smoothing_window"] = cfg.smoothing_window;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << meta.dump(2) << "\n";
}

void print_success_table(const shaperl::ExperimentResult& result,
                         const std::vector<std::string>& schemes) {
  std::printf("%-16s %s\n", "scheme", "converged");
  for (const auto& scheme : schemes) {
    int total = 0, converged = 0;
    for (const auto& run : result.runs) {
      if (run.scheme != scheme) continue;
      ++total;
      converged += run.converged ? 1 : 0;
    }
    std::printf("%-16s %d/%d (%.0f%%)\n", scheme.c_str(), converged, total,
                total > 0 ? 100.0 * converged / total : 0.0);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"potential-based shaping workbench"};
  app.require_subcommand(1);
  // let global flags (--out-dir, --jobs, --seed-offset) appear after the
  // subcommand as well
  app.fallthrough();

  std::string out_dir = "out";
  int jobs = 1;
  std::uint64_t seed_offset = 0;
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();
  app.add_option("--jobs", jobs, "parallel run workers")->capture_default_str();
  app.add_option("--seed-offset", seed_offset, "offset added to every configured seed")
      ->capture_default_str();

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  run_cmd->add_option("config", run_config, "JSON config path")->required();

  std::string sweep_config;
  std::string pj_list = "0.1,0.2,0.3,0.5";
  auto* sweep_cmd = app.add_subcommand("sweep-pj", "first-100-episode reward vs jump probability");
  sweep_cmd->add_option("config", sweep_config, "JSON config path (gridworld)")->required();
  sweep_cmd->add_option("--pj", pj_list, "comma-separated jump probabilities")
      ->capture_default_str();

  std::string suite = "all";
  auto* check_cmd = app.add_subcommand("check", "run a property suite");
  check_cmd->add_option("suite", suite, "suite name or 'all'");

  std::string plot_csv, plot_out = "curves.svg";
  int plot_window = 10;
  auto* plot_cmd = app.add_subcommand("plot", "render learning curves from a records CSV");
  plot_cmd->add_option("csv", plot_csv, "records CSV path")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path")->capture_default_str();
  plot_cmd->add_option("--window", plot_window, "trailing smoothing window")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      shaperl::ExperimentConfig cfg = shaperl::load_experiment_config(run_config);
      std::filesystem::create_directories(out_dir);
      shaperl::ExperimentResult result = shaperl::run_experiment(cfg, jobs, seed_offset);
      std::string csv_path = out_dir + "/records.csv";
      std::string svg_path = out_dir + "/curves.svg";
      shaperl::emit_csv(result.records, csv_path);
      auto curves = shaperl::aggregate_curves(result.records, cfg.smoothing_window);
      shaperl::emit_svg(curves, svg_path, cfg.domain + " learning curves", cfg.smoothing_window);
      write_run_metadata(cfg, out_dir + "/run_meta.json");
      std::printf("wrote %s (%zu records) and %s\n", csv_path.c_str(), result.records.size(),
                  svg_path.c_str());
      print_success_table(result, cfg.schemes);
      return 0;
    }
    if (*sweep_cmd) {
      shaperl::ExperimentConfig cfg = shaperl::load_experiment_config(sweep_config);
      std::vector<double> pj_values = parse_double_list(pj_list);
      shaperl::PjSweepResult sweep = shaperl::sweep_pj(cfg, pj_values, jobs, seed_offset);
      std::filesystem::create_directories(out_dir);
      std::string csv_path = out_dir + "/pj_sweep.csv";
      shaperl::emit_sweep_csv(sweep, csv_path);
      std::printf("wrote %s\n", csv_path.c_str());
      std::printf("%-8s", "pj");
      for (const auto& scheme : sweep.schemes) std::printf(" %16s", scheme.c_str());
      std::printf("\n");
      for (std::size_t i = 0; i < sweep.pj_values.size(); ++i) {
        std::printf("%-8.3g", sweep.pj_values[i]);
        for (std::size_t k = 0; k < sweep.schemes.size(); ++k) {
          std::printf(" %16.3f", sweep.mean_first100[i][k]);
        }
        std::printf("\n");
      }
      return 0;
    }
    if (*check_cmd) {
      std::vector<shaperl::CheckResult> results = shaperl::run_check_suite(suite);
      bool all_pass = true;
      for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        std::printf("[%s] %-28s measured=%.3e tol=%.3e %s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.measured, r.tolerance,
                    r.detail.empty() ? "" : ("(" + r.detail + ")").c_str());
      }
      return all_pass ? 0 : 1;
    }
    if (*plot_cmd) {
      auto records = shaperl::parse_csv(plot_csv);
      auto curves = shaperl::aggregate_curves(records, plot_window);
      shaperl::emit_svg(curves, plot_out, "learning curves", plot_window);
      std::printf("wrote %s\n", plot_out.c_str());
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
