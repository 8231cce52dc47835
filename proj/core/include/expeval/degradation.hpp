#pragma once

#include <cstdint>
#include <string>

#include "expeval/dataset.hpp"
#include "expeval/model.hpp"

namespace expeval {

enum class DegradationKind { RandomizeWeights, InvertLabels, LimitData };

DegradationKind parse_degradation(const std::string& name);
std::string degradation_name(DegradationKind kind);

struct DegradationSpec {
  DegradationKind kind = DegradationKind::RandomizeWeights;
  /// randomize/invert: fraction degraded; limit: fraction kept.
  double level = 0.0;
  /// Gaussian noise scale, relative to each layer's parameter std deviation
  /// (randomize_weights only).
  double noise_sigma = 0.5;
  /// Pick layers to randomize at random instead of from the output end.
  bool random_layer_order = false;
  uint64_t seed = 0;
};

/// Adds seeded Gaussian noise to ceil(level * L) parameterized layers,
/// selected from the output end (cascading-randomization order).
Model randomize_weights(const Model& model, const DegradationSpec& spec);

/// Reassigns a seeded fraction `level` of labels uniformly among the other
/// classes; the returned dataset carries a corruption mask.
LabeledDataset invert_labels(const LabeledDataset& dataset, const DegradationSpec& spec);

/// Seeded stratified subsample keeping ceil(level * N) samples.
LabeledDataset limit_data(const LabeledDataset& dataset, const DegradationSpec& spec);

}  // namespace expeval
