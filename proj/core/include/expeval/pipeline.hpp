#pragma once

#include "expeval/config.hpp"
#include "expeval/report.hpp"

namespace expeval {

/// Everything one evaluation produces, for callers that need more than the
/// report (archives, per-pair provenance).
struct RunResult {
  LabeledDataset train_set;
  LabeledDataset test_set;
  FoldEnsemble ensemble;
  std::vector<std::vector<ExplanationMap>> explanations;
  SeparationSets sets;
  MetricReport report;
};

/// Stage 1: materialize the dataset, split, apply any degradation, and train
/// the k fold models. Fills train_set/test_set/ensemble.
RunResult train_stage(const RunConfig& cfg);

/// Stage 2: explanation of every training sample under every fold model.
void explain_stage(RunResult& result, const RunConfig& cfg);

/// Stage 3: separation sets and the metric report (requires stages 1-2, or
/// explanations loaded back from archives).
void metrics_stage(RunResult& result, const RunConfig& cfg);

/// All three stages: the full procedure for one RunConfig.
RunResult evaluate_run(const RunConfig& cfg);

}  // namespace expeval
