// quadpix CLI: desk-scale experiment runners and the equivalence verifier.
//
// Subcommands:
//   noise   structured-vs-pink-noise discrimination (pixels vs quad features)
//   sweep   alignment-error / training-size grid for one feature
//   detect  detection-style positives/negatives run (pixels, hog, quad)
//   verify  reformulation and compact-feature equivalence suites
//
// Each subcommand exits 0 only when all of its acceptance assertions pass.
// A `key = value` config file (--config) is applied first; explicit flags win.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "quadpix/quadpix.hpp"
#include "quadpix/verify.hpp"

namespace {

void add_common_options(CLI::App* cmd, quadpix::ExperimentConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "key = value config file (applied before flags)");
  cmd->add_option("--feature", cfg.feature, "pixels|hog_baseline|hog_conv|hog_reform|quad");
  cmd->add_option("--window-radius", cfg.window_radius, "quad window radius");
  cmd->add_option("--train-sizes", cfg.train_sizes, "training set sizes")->delimiter(',');
  cmd->add_option("--rms-levels", cfg.rms_levels, "RMS point-error levels")->delimiter(',');
  cmd->add_option("-C,--C", cfg.C, "SVM regularization C");
  cmd->add_option("--tol", cfg.tol, "solver tolerance");
  cmd->add_option("--seed", cfg.seed, "base random seed");
  cmd->add_option("-o,--out", cfg.output_dir, "output directory for CSV/manifests");
  cmd->add_option("--corpus", cfg.corpus_dir, "directory of natural images (optional)");
  cmd->add_option("--memory-budget", cfg.memory_budget, "bytes before feature streaming");
  cmd->add_option("--patch-size", cfg.patch_size, "patch side (0 = experiment default)");
  cmd->add_option("--workers", cfg.workers,
                  "concurrent grid cells (0 = QUADPIX_WORKERS env or hardware)");
}

int report(const std::vector<quadpix::CheckResult>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::printf("[%s] %s (%s)\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.details.c_str());
    ok = ok && c.pass;
  }
  return ok ? 0 : 1;
}

void print_rows(const std::vector<quadpix::ResultRow>& rows) {
  for (const auto& r : rows)
    std::printf("%-18s %-20s size=%-7d rms=%-5.2f acc=%.4f dim=%lld %.1fs\n",
                r.experiment.c_str(), r.feature.c_str(), r.train_size, r.rms_level,
                r.test_accuracy, r.feature_dim, r.train_seconds);
}

// applied before CLI11 assigns flags, so command-line values take precedence
void preload_config(int argc, char** argv, quadpix::ExperimentConfig& cfg) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) {
      quadpix::apply_config_file(cfg, argv[i + 1]);
      return;
    }
    if (arg.rfind("--config=", 0) == 0) {
      quadpix::apply_config_file(cfg, arg.substr(9));
      return;
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadpix: local second-order pixel-interaction features and linear SVMs"};
  app.require_subcommand(1);

  quadpix::ExperimentConfig cfg;
  std::string config_path;

  CLI::App* noise = app.add_subcommand("noise", "structured vs 1/f-noise discrimination");
  add_common_options(noise, cfg, config_path);
  CLI::App* sweep = app.add_subcommand("sweep", "alignment / training-size sweep");
  add_common_options(sweep, cfg, config_path);
  CLI::App* detect = app.add_subcommand("detect", "detection-style desk run");
  add_common_options(detect, cfg, config_path);
  CLI::App* verify = app.add_subcommand("verify", "equivalence suites");
  std::uint64_t verify_seed = 2024;
  verify->add_option("--seed", verify_seed, "random seed");

  try {
    preload_config(argc, argv, cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(verify)) {
      auto checks = quadpix::verify_reformulation(verify_seed);
      const auto quad_checks = quadpix::verify_quad_fidelity(verify_seed);
      checks.insert(checks.end(), quad_checks.begin(), quad_checks.end());
      return report(checks);
    }

    if (app.got_subcommand(noise)) {
      cfg.experiment = "noise_vs_structured";
      if (cfg.train_sizes.empty()) cfg.train_sizes = {2000};
      if (cfg.rms_levels.empty()) cfg.rms_levels = {0.0};
      const auto outcome = quadpix::run_noise_vs_structured(cfg);
      print_rows(outcome.rows);
      return report(quadpix::evaluate_noise(outcome));
    }

    if (app.got_subcommand(sweep)) {
      cfg.experiment = "alignment_sweep";
      if (cfg.train_sizes.empty()) cfg.train_sizes = {300, 1500, 15000};
      if (cfg.rms_levels.empty()) cfg.rms_levels = {0.0, 2.0, 5.0, 10.0};
      const auto outcome = quadpix::run_alignment_sweep(cfg);
      print_rows(outcome.rows);
      return report(quadpix::evaluate_sweep(outcome.rows));
    }

    if (app.got_subcommand(detect)) {
      cfg.experiment = "detect_desk";
      if (cfg.train_sizes.empty()) cfg.train_sizes = {3000};
      if (cfg.rms_levels.empty()) cfg.rms_levels = {3.0};
      const auto outcome = quadpix::run_detect_desk(cfg);
      print_rows(outcome.rows);
      for (const auto& [feature, eer] : outcome.eer)
        std::printf("EER %-14s %.4f\n", feature.c_str(), eer);
      return report(quadpix::evaluate_detect(outcome));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
