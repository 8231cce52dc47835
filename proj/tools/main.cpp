// expeval: cross-training evaluation of gradient-based explanations.
//
// Subcommands: gen-data, train, explain, sanity, metrics, degrade-sweep,
// report. Exit codes: 0 success, 1 check failure, 2 usage/config error,
// 3 data/file error, 4 numeric error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "expeval/archive.hpp"
#include "expeval/dataset.hpp"
#include "expeval/degradation.hpp"
#include "expeval/ensemble_io.hpp"
#include "expeval/errors.hpp"
#include "expeval/model_io.hpp"
#include "expeval/pipeline.hpp"
#include "expeval/sanity.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace expeval;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

std::string default_out_dir() {
  const char* env = std::getenv("EXPEVAL_OUTPUT_DIR");
  return env && *env ? env : ".";
}

RunConfig load_config_or_default(const std::string& config_path, uint64_t seed_override,
                                 bool seed_given) {
  RunConfig cfg;
  if (!config_path.empty()) cfg = load_run_config(config_path);
  if (seed_given) cfg.seed = seed_override;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw FormatError("write failed for " + path);
}

void print_report_summary(const MetricReport& r) {
  std::cout << "method=" << method_name(r.method)
            << " distance=" << distance_name(r.distance_kind)
            << " degradation=" << r.degradation << ":" << r.degradation_level
            << " reco=" << r.reco << " reco_auc=" << r.reco_auc << " mege=" << r.mege
            << " mu_f=" << r.mu_f_mean << " s_avg=" << r.s_avg_mean
            << " skipped=" << r.skipped_pairs << '\n';
}

std::string archive_name(int fold) { return "fold" + std::to_string(fold) + ".xta"; }

void write_fold_archives(const RunResult& result, const RunConfig& cfg,
                         const std::string& dir) {
  for (int i = 0; i < result.ensemble.k; ++i) {
    ExplanationArchive a = ExplanationArchive::from_maps(
        result.explanations[static_cast<size_t>(i)],
        result.ensemble.models[static_cast<size_t>(i)].model_id, cfg.seed);
    write_archive(a, (fs::path(dir) / archive_name(i)).string());
  }
}

std::vector<std::vector<ExplanationMap>> read_fold_archives(const FoldEnsemble& ensemble,
                                                            const std::string& dir) {
  std::vector<std::vector<ExplanationMap>> explanations;
  for (int i = 0; i < ensemble.k; ++i) {
    ExplanationArchive a = read_archive((fs::path(dir) / archive_name(i)).string());
    std::vector<ExplanationMap> maps;
    maps.reserve(static_cast<size_t>(a.sample_count()));
    for (int s = 0; s < a.sample_count(); ++s) maps.push_back(a.map(s));
    explanations.push_back(std::move(maps));
  }
  return explanations;
}

ordered_json sanity_report_json(const SanityReport& r) {
  ordered_json j;
  j["passed"] = r.passed;
  j["monotone_fraction"] = r.monotone_fraction;
  j["spearman_vs_index"] = r.spearman_vs_index;
  ordered_json series = ordered_json::array();
  for (const auto& [step, d] : r.distance_series) series.push_back({step, d});
  j["series"] = series;
  return j;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Cross-training evaluation of gradient-based explanation methods"};
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  app.add_option("--out-dir", out_dir,
                 "Output directory (default: $EXPEVAL_OUTPUT_DIR or '.')");

  // ---- gen-data ----
  auto* gen = app.add_subcommand("gen-data", "Generate the procedural shapes dataset");
  int gen_n = 2000, gen_size = 16, gen_classes = 4;
  uint64_t gen_seed = 0;
  std::string gen_out = "dataset.xtd";
  gen->add_option("--n", gen_n, "Number of samples");
  gen->add_option("--size", gen_size, "Image side length");
  gen->add_option("--classes", gen_classes, "Number of classes (2-8)");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output file name (relative to --out-dir)");

  // ---- train ----
  auto* train_cmd = app.add_subcommand("train", "Train the k-fold coalition ensemble");
  std::string train_config;
  uint64_t train_seed = 0;
  bool train_seed_given = false;
  train_cmd->add_option("--config", train_config, "Run configuration JSON file");
  train_cmd->add_option("--seed", train_seed, "Override the configured seed")
      ->each([&](const std::string&) { train_seed_given = true; });

  // ---- explain ----
  auto* explain_cmd =
      app.add_subcommand("explain", "Fill explanation archives for a trained ensemble");
  std::string explain_ensemble;
  explain_cmd->add_option("--ensemble", explain_ensemble, "Directory written by 'train'")
      ->required();

  // ---- sanity ----
  auto* sanity_cmd =
      app.add_subcommand("sanity", "Spatial and noise sanity checks for all distance kinds");
  int sanity_size = 32, sanity_steps = 100, sanity_repeats = 50;
  uint64_t sanity_seed = 0;
  sanity_cmd->add_option("--size", sanity_size, "Test image side length");
  sanity_cmd->add_option("--steps", sanity_steps, "Spatial interpolation steps");
  sanity_cmd->add_option("--repeats", sanity_repeats, "Noise repeats per sigma");
  sanity_cmd->add_option("--seed", sanity_seed, "Noise seed");

  // ---- metrics ----
  auto* metrics_cmd =
      app.add_subcommand("metrics", "Build separation sets and emit a MetricReport");
  std::string metrics_config, metrics_ensemble, metrics_out = "report.json";
  uint64_t metrics_seed = 0;
  bool metrics_seed_given = false;
  metrics_cmd->add_option("--config", metrics_config,
                          "Run configuration JSON (full pipeline in one go)");
  metrics_cmd->add_option("--ensemble", metrics_ensemble,
                          "Reuse a directory written by 'train' (and 'explain', if run)");
  metrics_cmd->add_option("--out", metrics_out, "Report file name (relative to --out-dir)");
  metrics_cmd->add_option("--seed", metrics_seed, "Override the configured seed")
      ->each([&](const std::string&) { metrics_seed_given = true; });

  // ---- degrade-sweep ----
  auto* sweep_cmd = app.add_subcommand(
      "degrade-sweep", "Repeat metrics across a grid of degradation specs");
  std::string sweep_config;
  std::vector<std::string> sweep_kinds = {"randomize_weights", "invert_labels", "limit_data"};
  std::vector<double> sweep_levels;
  uint64_t sweep_seed = 0;
  bool sweep_seed_given = false;
  sweep_cmd->add_option("--config", sweep_config, "Base run configuration JSON file");
  sweep_cmd->add_option("--kinds", sweep_kinds, "Degradation kinds to sweep");
  sweep_cmd->add_option("--levels", sweep_levels,
                        "Levels to apply to every kind (default: each kind's standard grid)");
  sweep_cmd->add_option("--seed", sweep_seed, "Override the configured seed")
      ->each([&](const std::string&) { sweep_seed_given = true; });

  // ---- report ----
  auto* report_cmd =
      app.add_subcommand("report", "Merge MetricReport JSONs into CSV tables");
  std::vector<std::string> report_inputs;
  report_cmd->add_option("inputs", report_inputs, "MetricReport JSON files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Collapse CLI11's assorted parse-error codes onto the usage exit code.
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  fs::create_directories(out_dir);

  if (*gen) {
    LabeledDataset data = gen_shapes(gen_n, gen_size, gen_classes, gen_seed);
    std::string path = (fs::path(out_dir) / gen_out).string();
    save_dataset(data, path);
    std::cout << "wrote " << data.size() << " samples (" << gen_classes << " classes, "
              << gen_size << "x" << gen_size << ") to " << path << '\n';
    return 0;
  }

  if (*train_cmd) {
    RunConfig cfg = load_config_or_default(train_config, train_seed, train_seed_given);
    RunResult result = train_stage(cfg);
    std::string dir = (fs::path(out_dir) / "ensemble").string();
    save_ensemble(result.ensemble, cfg, dir);
    save_dataset(result.train_set, (fs::path(dir) / "train.xtd").string());
    save_dataset(result.test_set, (fs::path(dir) / "test.xtd").string());
    std::cout << "trained k=" << result.ensemble.k << " fold models into " << dir
              << "; test accuracies:";
    for (double a : result.ensemble.accuracies) std::cout << ' ' << a;
    std::cout << '\n';
    return 0;
  }

  if (*explain_cmd) {
    LoadedEnsemble loaded = load_ensemble(explain_ensemble);
    RunResult result;
    result.ensemble = std::move(loaded.ensemble);
    result.train_set = load_dataset((fs::path(explain_ensemble) / "train.xtd").string());
    explain_stage(result, loaded.config);
    write_fold_archives(result, loaded.config, explain_ensemble);
    std::cout << "wrote " << result.ensemble.k << " archives ("
              << result.train_set.size() << " maps each, method "
              << method_name(loaded.config.method) << ") to " << explain_ensemble << '\n';
    return 0;
  }

  if (*sanity_cmd) {
    std::vector<double> sigmas;
    for (int i = 1; i <= 10; ++i) sigmas.push_back(0.05 * i);
    Tensor base = sanity_mask(sanity_size, 0.5);
    bool all_passed = true;
    for (const char* name : {"spearman_abs", "l1", "l2", "ssim", "dice"}) {
      DistanceKind kind = parse_distance(name);
      SanityReport spatial = sanity_spatial(kind, sanity_size, sanity_steps);
      SanityReport noise = sanity_noise(kind, base, sigmas, sanity_repeats, sanity_seed);
      bool passed = spatial.passed && noise.passed;
      all_passed = all_passed && passed;
      ordered_json j;
      j["distance"] = name;
      j["spatial"] = sanity_report_json(spatial);
      j["noise"] = sanity_report_json(noise);
      j["passed"] = passed;
      write_text((fs::path(out_dir) / ("sanity_" + std::string(name) + ".json")).string(),
                 j.dump(2) + "\n");
      std::cout << name << ": spatial rho=" << spatial.spearman_vs_index
                << " noise rho=" << noise.spearman_vs_index << " -> "
                << (passed ? "pass" : "FAIL") << '\n';
    }
    return all_passed ? 0 : kExitCheckFailed;
  }

  if (*metrics_cmd) {
    RunResult result;
    RunConfig cfg;
    if (!metrics_ensemble.empty()) {
      LoadedEnsemble loaded = load_ensemble(metrics_ensemble);
      cfg = loaded.config;
      if (metrics_seed_given) cfg.seed = metrics_seed;
      result.ensemble = std::move(loaded.ensemble);
      result.train_set = load_dataset((fs::path(metrics_ensemble) / "train.xtd").string());
      result.test_set = load_dataset((fs::path(metrics_ensemble) / "test.xtd").string());
      if (fs::exists(fs::path(metrics_ensemble) / archive_name(0))) {
        result.explanations = read_fold_archives(result.ensemble, metrics_ensemble);
      } else {
        explain_stage(result, cfg);
      }
      metrics_stage(result, cfg);
    } else {
      cfg = load_config_or_default(metrics_config, metrics_seed, metrics_seed_given);
      result = evaluate_run(cfg);
    }
    std::string path = (fs::path(out_dir) / metrics_out).string();
    save_report(result.report, path);
    print_report_summary(result.report);
    std::cout << "wrote " << path << '\n';
    return 0;
  }

  if (*sweep_cmd) {
    RunConfig base = load_config_or_default(sweep_config, sweep_seed, sweep_seed_given);
    std::vector<MetricReport> reports;

    base.degradation.reset();
    RunResult baseline = evaluate_run(base);
    save_report(baseline.report, (fs::path(out_dir) / "report_none.json").string());
    print_report_summary(baseline.report);
    reports.push_back(baseline.report);

    for (const std::string& kind_name : sweep_kinds) {
      DegradationKind kind = parse_degradation(kind_name);
      std::vector<double> levels = sweep_levels;
      if (levels.empty()) {
        levels = (kind == DegradationKind::LimitData) ? std::vector<double>{0.75, 0.5, 0.25}
                                                      : std::vector<double>{0.05, 0.1, 0.3};
      }
      for (double level : levels) {
        RunConfig cfg = base;
        DegradationSpec spec;
        spec.kind = kind;
        spec.level = level;
        cfg.degradation = spec;
        RunResult r = evaluate_run(cfg);
        std::string name = "report_" + kind_name + "_" + std::to_string(level) + ".json";
        save_report(r.report, (fs::path(out_dir) / name).string());
        print_report_summary(r.report);
        reports.push_back(r.report);
      }
    }
    write_text((fs::path(out_dir) / "tables.csv").string(), reports_to_csv(reports));
    write_text((fs::path(out_dir) / "histograms.csv").string(),
               reports_to_histogram_csv(reports));
    std::cout << "wrote " << reports.size() << " reports plus tables.csv/histograms.csv to "
              << out_dir << '\n';
    return 0;
  }

  if (*report_cmd) {
    std::vector<MetricReport> reports;
    for (const std::string& path : report_inputs) reports.push_back(load_report(path));
    write_text((fs::path(out_dir) / "tables.csv").string(), reports_to_csv(reports));
    write_text((fs::path(out_dir) / "histograms.csv").string(),
               reports_to_histogram_csv(reports));
    std::cout << "merged " << reports.size() << " reports into " << out_dir
              << "/tables.csv and histograms.csv\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const ShapeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const UndefinedMetricError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}
