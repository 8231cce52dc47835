#include "expeval/pipeline.hpp"

#include <algorithm>

#include "expeval/degradation.hpp"
#include "expeval/metrics.hpp"
#include "expeval/rng.hpp"

namespace expeval {

namespace {
constexpr uint64_t kSplitTag = 0x73706c6974ULL;  // "split"
constexpr uint64_t kDegradeTag = 0x64656772ULL;  // "degr"
constexpr uint64_t kFidelityTag = 0x666964ULL;   // "fid"
constexpr uint64_t kStabilityTag = 0x737461ULL;  // "sta"
constexpr uint64_t kFoldTag = 0x666f6c64ULL;     // "fold"

DegradationSpec resolved_degradation(const RunConfig& cfg) {
  DegradationSpec deg = *cfg.degradation;
  deg.seed = Rng::derive(cfg.seed, kDegradeTag);
  return deg;
}
}  // namespace

RunResult train_stage(const RunConfig& cfg) {
  RunResult result;
  LabeledDataset full = load_spec_dataset(cfg.dataset, cfg.seed);
  TrainTestSplit split =
      split_train_test(full, cfg.test_fraction, Rng::derive(cfg.seed, kSplitTag));
  result.test_set = std::move(split.test);
  result.train_set = std::move(split.train);

  EnsembleConfig ens_cfg = cfg.ensemble;
  ens_cfg.train.seed = cfg.seed;

  if (cfg.degradation) {
    DegradationSpec deg = resolved_degradation(cfg);
    if (deg.kind == DegradationKind::InvertLabels) {
      result.train_set = invert_labels(result.train_set, deg);
    } else if (deg.kind == DegradationKind::LimitData) {
      result.train_set = limit_data(result.train_set, deg);
    }
    // Degraded accuracies vary by design; record the spread, never enforce it.
    ens_cfg.strict_accuracy = false;
  }

  result.ensemble =
      train_ensemble(result.train_set, result.test_set, cfg.architecture, ens_cfg);

  if (cfg.degradation && cfg.degradation->kind == DegradationKind::RandomizeWeights) {
    DegradationSpec deg = resolved_degradation(cfg);
    for (int i = 0; i < result.ensemble.k; ++i) {
      DegradationSpec fold_deg = deg;
      fold_deg.seed = Rng::derive(deg.seed, static_cast<uint64_t>(i));
      Model& m = result.ensemble.models[static_cast<size_t>(i)];
      std::string id = m.model_id;
      m = randomize_weights(m, fold_deg);
      m.model_id = id;
      result.ensemble.accuracies[static_cast<size_t>(i)] = accuracy(m, result.test_set);
    }
  }
  return result;
}

void explain_stage(RunResult& result, const RunConfig& cfg) {
  result.explanations =
      explain_all(result.ensemble, result.train_set, cfg.method, cfg.attribution);
}

void metrics_stage(RunResult& result, const RunConfig& cfg) {
  result.sets = build_separation_sets(result.ensemble, result.train_set, result.explanations,
                                      cfg.distance);

  MetricReport& report = result.report;
  report.dataset = cfg.dataset.describe();
  report.arch = cfg.architecture;
  report.method = cfg.method;
  report.distance_kind = cfg.distance;
  report.k = result.ensemble.k;
  report.seeds.clear();
  report.seeds.push_back(cfg.seed);
  for (int i = 0; i < result.ensemble.k; ++i) {
    report.seeds.push_back(Rng::derive(cfg.seed, kFoldTag + static_cast<uint64_t>(i)));
  }
  report.accuracies = result.ensemble.accuracies;

  RecoResult rc = reco(result.sets);
  report.reco = rc.reco;
  report.reco_auc = rc.reco_auc;
  report.best_gamma = rc.best_threshold;
  report.mege = mege(result.sets).mege;
  report.skipped_pairs = result.sets.skipped_pairs;
  report.histograms = make_histograms(result.sets);
  if (cfg.degradation) {
    report.degradation = degradation_name(cfg.degradation->kind);
    report.degradation_level = cfg.degradation->level;
  }
  report.run_config = cfg;

  // Per-sample fidelity/stability, averaged over held-out test samples.
  // Each sample is scored under one fold model, round-robin, to keep the
  // cost independent of k.
  int limit = cfg.metric_sample_limit;
  int count = result.test_set.size();
  if (limit > 0) count = std::min(count, limit);
  double mu_sum = 0.0, s_sum = 0.0;
  int n = 0;
  for (int t = 0; t < count; ++t) {
    const Model& model =
        result.ensemble.models[static_cast<size_t>(t % result.ensemble.k)];
    Tensor x = result.test_set.sample(t);
    int cls = argmax(forward(model, x).logits());
    ExplanationMap m = attribute(cfg.method, model, x, cls, cfg.attribution);
    FidelityConfig fid = cfg.fidelity;
    fid.seed = Rng::derive(cfg.seed, kFidelityTag + static_cast<uint64_t>(t));
    mu_sum += fidelity_mu(model, x, m, fid);
    StabilityConfig stab = cfg.stability;
    stab.seed = Rng::derive(cfg.seed, kStabilityTag + static_cast<uint64_t>(t));
    AttributionConfig attr = cfg.attribution;
    attr.rng_seed = Rng::derive(stab.seed, 1);
    s_sum += stability_savg(model, x, cfg.method, stab, attr);
    ++n;
  }
  report.mu_f_mean = n ? mu_sum / n : 0.0;
  report.s_avg_mean = n ? s_sum / n : 0.0;
}

RunResult evaluate_run(const RunConfig& cfg) {
  RunResult result = train_stage(cfg);
  explain_stage(result, cfg);
  metrics_stage(result, cfg);
  return result;
}

}  // namespace expeval
