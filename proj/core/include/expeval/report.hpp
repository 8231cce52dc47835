#pragma once

#include <string>
#include <vector>

#include "expeval/config.hpp"
#include "expeval/cross_training.hpp"
#include "expeval/metrics.hpp"

namespace expeval {

/// 50 uniform bins over [0, max distance] shared by both multisets.
struct SeparationHistograms {
  std::vector<int> s_equal_bins;
  std::vector<int> s_diff_bins;
  double bin_width = 0.0;
  double max_distance = 0.0;
};

SeparationHistograms make_histograms(const SeparationSets& sets, int bins = 50);

/// The end product of one evaluation run. Serializes to a stable JSON
/// document that embeds the RunConfig, so any report can be regenerated
/// from its own header.
struct MetricReport {
  std::string dataset;
  std::string arch;
  Method method = Method::SM;
  DistanceKind distance_kind;
  int k = 0;
  std::vector<uint64_t> seeds;       // master seed then per-fold train seeds
  std::vector<double> accuracies;    // fold test accuracies
  double reco = 0.0;
  double reco_auc = 0.0;
  double best_gamma = 0.0;
  double mege = 0.0;
  double mu_f_mean = 0.0;
  double s_avg_mean = 0.0;
  int skipped_pairs = 0;
  SeparationHistograms histograms;
  /// Degradation applied before training, or "none".
  std::string degradation = "none";
  double degradation_level = 0.0;
  RunConfig run_config;
};

std::string report_to_json(const MetricReport& report);
MetricReport parse_report(const std::string& json_text);

void save_report(const MetricReport& report, const std::string& path);
MetricReport load_report(const std::string& path);

/// One table row per (method, degradation, level), stable-ordered; columns:
/// method, distance, degradation, level, reco, reco_auc, mege, mu_f_mean,
/// s_avg_mean, skipped_pairs, accuracy_mean, accuracy_spread.
std::string reports_to_csv(std::vector<MetricReport> reports);

/// Long-format histogram rows: method, degradation, level, set, bin_low,
/// bin_high, count.
std::string reports_to_histogram_csv(std::vector<MetricReport> reports);

}  // namespace expeval
