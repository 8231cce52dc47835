#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "expeval/attribution.hpp"
#include "expeval/dataset.hpp"
#include "expeval/distance.hpp"
#include "expeval/model.hpp"
#include "expeval/train.hpp"

namespace expeval {

/// k leave-one-block-out models plus the block partition that produced them.
struct FoldEnsemble {
  std::vector<std::vector<int>> blocks;  // k disjoint index sets into the dataset
  std::vector<Model> models;             // model i trained on D \ blocks[i]
  std::vector<double> accuracies;        // test-set accuracy per model
  int k = 0;
};

/// Seeded, class-stratified partition into k blocks of equal size (+-1).
/// Set `stratified` to false for a plain shuffle-and-split.
std::vector<std::vector<int>> partition(const LabeledDataset& dataset, int k, uint64_t seed,
                                        bool stratified = true);

struct EnsembleConfig {
  int k = 5;
  TrainConfig train;
  /// Maximum allowed spread between fold test accuracies.
  double accuracy_tolerance = 0.03;
  /// Throw when the spread exceeds the tolerance (otherwise just record).
  bool strict_accuracy = false;
  bool stratified = true;
};

/// Trains the k coalition models and checks their test-accuracy spread.
FoldEnsemble train_ensemble(const LabeledDataset& dataset, const LabeledDataset& test_set,
                            const std::string& architecture_id, const EnsembleConfig& cfg);

/// The two distance multisets produced by the cross-training procedure.
struct SeparationSets {
  std::vector<double> s_equal;  // both models predicted the label
  std::vector<double> s_diff;   // exactly one did
  /// (sample index, i, j) per recorded distance: s_equal provenance first,
  /// then s_diff, in emission order.
  std::vector<std::tuple<int, int, int>> provenance_equal;
  std::vector<std::tuple<int, int, int>> provenance_diff;
  int skipped_pairs = 0;        // neither-correct pairs ("pass" branch)
  int degenerate_pairs = 0;     // pairs dropped on degenerate-distance errors
};

/// Computes the explanation of every sample under every fold model.
/// explanations[i][n] is the map of sample n under model i.
std::vector<std::vector<ExplanationMap>> explain_all(const FoldEnsemble& ensemble,
                                                     const LabeledDataset& dataset, Method method,
                                                     const AttributionConfig& cfg);

/// Pairs each sample's held-out model with the k-1 models trained on it and
/// routes the distances per the both-correct / one-correct rule.
SeparationSets build_separation_sets(const FoldEnsemble& ensemble, const LabeledDataset& dataset,
                                     Method method, const DistanceKind& kind,
                                     const AttributionConfig& cfg = {});

/// Same, from precomputed explanations (e.g. read back from archives).
SeparationSets build_separation_sets(
    const FoldEnsemble& ensemble, const LabeledDataset& dataset,
    const std::vector<std::vector<ExplanationMap>>& explanations, const DistanceKind& kind);

/// Block index holding sample n, i.e. the one model not trained on it.
int block_of(const FoldEnsemble& ensemble, int sample_index);

}  // namespace expeval
