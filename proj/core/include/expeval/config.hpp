#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "expeval/attribution.hpp"
#include "expeval/cross_training.hpp"
#include "expeval/degradation.hpp"
#include "expeval/distance.hpp"
#include "expeval/metrics.hpp"

namespace expeval {

/// Where the evaluation data comes from: the built-in generator or a pair of
/// IDX files.
struct DatasetSpec {
  std::string source = "shapes";  // "shapes" | "idx" | "file"
  // shapes
  int n = 2000;
  int size = 16;
  int classes = 4;
  // idx
  std::string images_path;
  std::string labels_path;
  int limit = -1;  // negative = all
  // file (internal dataset container)
  std::string path;

  std::string describe() const;
};

/// One full evaluation run. Every field has a default reproducing the
/// reference protocol (k=5; IG m=60; SG m=60, sigma=0.2; fidelity 15%
/// subsets with zero baseline; stability radius 0.1).
struct RunConfig {
  DatasetSpec dataset;
  std::string architecture =
      "conv:8:3|relu|avgpool:2|conv:16:3|relu|flatten|dense:4";
  Method method = Method::SM;
  DistanceKind distance = {DistanceId::SpearmanAbs};
  EnsembleConfig ensemble;          // k, train schedule, accuracy tolerance
  AttributionConfig attribution;
  FidelityConfig fidelity;
  StabilityConfig stability;
  std::optional<DegradationSpec> degradation;
  double test_fraction = 0.2;
  uint64_t seed = 0;
  /// Number of samples fed to the per-sample metrics (fidelity/stability);
  /// 0 means all.
  int metric_sample_limit = 64;
  std::string output_dir;
};

/// JSON (de)serialization. parse_run_config accepts a partial document and
/// fills the rest from defaults; unknown keys raise ConfigError.
std::string run_config_to_json(const RunConfig& cfg);
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Materializes the dataset a RunConfig points at.
LabeledDataset load_spec_dataset(const DatasetSpec& spec, uint64_t seed);

}  // namespace expeval
