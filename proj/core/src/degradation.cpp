#include "expeval/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

DegradationKind parse_degradation(const std::string& name) {
  if (name == "randomize_weights" || name == "randomize") return DegradationKind::RandomizeWeights;
  if (name == "invert_labels" || name == "invert") return DegradationKind::InvertLabels;
  if (name == "limit_data" || name == "limit") return DegradationKind::LimitData;
  throw ConfigError("unknown degradation kind '" + name + "'");
}

std::string degradation_name(DegradationKind kind) {
  switch (kind) {
    case DegradationKind::RandomizeWeights: return "randomize_weights";
    case DegradationKind::InvertLabels: return "invert_labels";
    case DegradationKind::LimitData: return "limit_data";
  }
  return "?";
}

namespace {

void check_level(const DegradationSpec& spec) {
  if (spec.level < 0.0 || spec.level > 1.0) {
    throw ConfigError("degradation: level must be in [0, 1], got " + std::to_string(spec.level));
  }
}

}  // namespace

Model randomize_weights(const Model& model, const DegradationSpec& spec) {
  if (spec.kind != DegradationKind::RandomizeWeights) {
    throw ConfigError("randomize_weights: spec kind is " + degradation_name(spec.kind));
  }
  check_level(spec);
  if (spec.noise_sigma <= 0.0) throw ConfigError("randomize_weights: noise_sigma must be > 0");

  std::vector<int> param_layers;
  for (int li = 0; li < model.layer_count(); ++li) {
    if (!model.params(li).empty()) param_layers.push_back(li);
  }
  int n_sel = static_cast<int>(std::ceil(spec.level * static_cast<double>(param_layers.size())));
  if (n_sel == 0) return model;

  // Output-end first by default, matching cascading randomization.
  std::reverse(param_layers.begin(), param_layers.end());
  Rng rng(Rng::derive(spec.seed, 0x72616e64ULL));
  if (spec.random_layer_order) rng.shuffle(param_layers);

  Model out = model;
  for (int s = 0; s < n_sel; ++s) {
    int li = param_layers[static_cast<size_t>(s)];
    for (Tensor& p : out.params(li)) {
      // Noise scale is relative to the layer's parameter spread.
      double mean = p.sum() / p.size();
      double var = 0.0;
      for (int i = 0; i < p.size(); ++i) var += (p[i] - mean) * (p[i] - mean);
      double sd = std::sqrt(var / p.size());
      if (sd == 0.0) sd = 1.0;  // zero-initialized biases still get perturbed
      double sigma = spec.noise_sigma * sd;
      for (int i = 0; i < p.size(); ++i) p[i] += sigma * rng.gaussian();
    }
  }
  return out;
}

LabeledDataset invert_labels(const LabeledDataset& dataset, const DegradationSpec& spec) {
  if (spec.kind != DegradationKind::InvertLabels) {
    throw ConfigError("invert_labels: spec kind is " + degradation_name(spec.kind));
  }
  check_level(spec);
  if (dataset.class_count < 2) throw ConfigError("invert_labels: needs at least 2 classes");

  int n = dataset.size();
  int n_corrupt = static_cast<int>(std::llround(spec.level * n));
  Rng rng(Rng::derive(spec.seed, 0x696e76ULL));
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  LabeledDataset out = dataset;
  out.corruption_mask.assign(static_cast<size_t>(n), 0);
  for (int t = 0; t < n_corrupt; ++t) {
    int i = order[static_cast<size_t>(t)];
    int old_label = out.labels[static_cast<size_t>(i)];
    // Uniform over the other c-1 classes.
    int draw = rng.uniform_int(dataset.class_count - 1);
    out.labels[static_cast<size_t>(i)] = draw >= old_label ? draw + 1 : draw;
    out.corruption_mask[static_cast<size_t>(i)] = 1;
  }
  return out;
}

LabeledDataset limit_data(const LabeledDataset& dataset, const DegradationSpec& spec) {
  if (spec.kind != DegradationKind::LimitData) {
    throw ConfigError("limit_data: spec kind is " + degradation_name(spec.kind));
  }
  check_level(spec);
  if (spec.level == 1.0) return dataset;

  std::vector<std::vector<int>> by_class(static_cast<size_t>(dataset.class_count));
  for (int i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<size_t>(dataset.labels[static_cast<size_t>(i)])].push_back(i);
  }
  int target = static_cast<int>(std::ceil(spec.level * dataset.size()));
  std::vector<int> keep;
  // Largest classes give up samples first so per-class counts stay within 1
  // of proportional.
  int total = 0;
  std::vector<int> quota(by_class.size());
  for (size_t c = 0; c < by_class.size(); ++c) {
    quota[c] = static_cast<int>(std::floor(spec.level * static_cast<double>(by_class[c].size())));
    total += quota[c];
  }
  for (size_t c = 0; total < target && c < by_class.size(); ++c) {
    if (quota[c] < static_cast<int>(by_class[c].size())) {
      ++quota[c];
      ++total;
    }
  }
  for (size_t c = 0; c < by_class.size(); ++c) {
    if (!by_class[c].empty() && quota[c] == 0) {
      throw ConfigError("limit_data: level " + std::to_string(spec.level) +
                        " leaves class " + std::to_string(c) + " empty");
    }
    Rng rng(Rng::derive(spec.seed, 0x6c696dULL + c));
    rng.shuffle(by_class[c]);
    keep.insert(keep.end(), by_class[c].begin(), by_class[c].begin() + quota[c]);
  }
  std::sort(keep.begin(), keep.end());
  return subset(dataset, keep);
}

}  // namespace expeval
