#include "expeval/cross_training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

std::vector<std::vector<int>> partition(const LabeledDataset& dataset, int k, uint64_t seed,
                                        bool stratified) {
  int n = dataset.size();
  if (k < 2) throw ConfigError("partition: k must be >= 2, got " + std::to_string(k));
  if (k > n) {
    throw ConfigError("partition: k=" + std::to_string(k) + " exceeds dataset size " +
                      std::to_string(n));
  }

  std::vector<int> order;
  order.reserve(static_cast<size_t>(n));
  if (stratified) {
    // Shuffle within each class, then interleave classes round-robin so any
    // contiguous block is close to class-balanced.
    std::vector<std::vector<int>> by_class(static_cast<size_t>(dataset.class_count));
    for (int i = 0; i < n; ++i) {
      by_class[static_cast<size_t>(dataset.labels[static_cast<size_t>(i)])].push_back(i);
    }
    for (size_t c = 0; c < by_class.size(); ++c) {
      Rng rng(Rng::derive(seed, c));
      rng.shuffle(by_class[c]);
    }
    size_t pos = 0;
    std::vector<size_t> next(by_class.size(), 0);
    while (order.size() < static_cast<size_t>(n)) {
      size_t c = pos % by_class.size();
      if (next[c] < by_class[c].size()) order.push_back(by_class[c][next[c]++]);
      ++pos;
    }
  } else {
    order.resize(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);
  }

  // Contiguous split into k blocks of size n/k, the first n%k blocks one
  // larger.
  std::vector<std::vector<int>> blocks(static_cast<size_t>(k));
  int base = n / k;
  int extra = n % k;
  int at = 0;
  for (int b = 0; b < k; ++b) {
    int len = base + (b < extra ? 1 : 0);
    auto& blk = blocks[static_cast<size_t>(b)];
    blk.assign(order.begin() + at, order.begin() + at + len);
    std::sort(blk.begin(), blk.end());
    at += len;
  }
  return blocks;
}

FoldEnsemble train_ensemble(const LabeledDataset& dataset, const LabeledDataset& test_set,
                            const std::string& architecture_id, const EnsembleConfig& cfg) {
  FoldEnsemble ensemble;
  ensemble.k = cfg.k;
  ensemble.blocks = partition(dataset, cfg.k, cfg.train.seed, cfg.stratified);

  std::vector<bool> held(static_cast<size_t>(dataset.size()));
  for (int i = 0; i < cfg.k; ++i) {
    held.assign(held.size(), false);
    for (int idx : ensemble.blocks[static_cast<size_t>(i)]) held[static_cast<size_t>(idx)] = true;
    std::vector<int> coalition;
    for (int idx = 0; idx < dataset.size(); ++idx) {
      if (!held[static_cast<size_t>(idx)]) coalition.push_back(idx);
    }
    LabeledDataset fold_data = subset(dataset, coalition);

    TrainConfig fold_cfg = cfg.train;
    fold_cfg.seed = Rng::derive(cfg.train.seed, 0x666f6c64ULL + static_cast<uint64_t>(i));
    Model init(architecture_id, dataset.sample_shape(), fold_cfg.seed);
    init.model_id = "fold" + std::to_string(i);
    Model trained = train(init, fold_data, fold_cfg);
    trained.model_id = init.model_id;
    ensemble.accuracies.push_back(accuracy(trained, test_set));
    ensemble.models.push_back(std::move(trained));
  }

  double lo = *std::min_element(ensemble.accuracies.begin(), ensemble.accuracies.end());
  double hi = *std::max_element(ensemble.accuracies.begin(), ensemble.accuracies.end());
  if (cfg.strict_accuracy && hi - lo > cfg.accuracy_tolerance) {
    throw ConfigError("train_ensemble: fold accuracy spread " + std::to_string(hi - lo) +
                      " exceeds tolerance " + std::to_string(cfg.accuracy_tolerance) +
                      " (min=" + std::to_string(lo) + ", max=" + std::to_string(hi) + ")");
  }
  return ensemble;
}

int block_of(const FoldEnsemble& ensemble, int sample_index) {
  for (size_t b = 0; b < ensemble.blocks.size(); ++b) {
    const auto& blk = ensemble.blocks[b];
    if (std::binary_search(blk.begin(), blk.end(), sample_index)) return static_cast<int>(b);
  }
  throw ConfigError("block_of: sample " + std::to_string(sample_index) + " not in any block");
}

std::vector<std::vector<ExplanationMap>> explain_all(const FoldEnsemble& ensemble,
                                                     const LabeledDataset& dataset, Method method,
                                                     const AttributionConfig& cfg) {
  std::vector<std::vector<ExplanationMap>> out(ensemble.models.size());
  for (size_t mi = 0; mi < ensemble.models.size(); ++mi) {
    const Model& model = ensemble.models[mi];
    out[mi].resize(static_cast<size_t>(dataset.size()));
    for (int n = 0; n < dataset.size(); ++n) {
      Tensor x = dataset.sample(n);
      int predicted = argmax(forward(model, x).logits());
      ExplanationMap e = attribute(method, model, x, predicted, cfg);
      e.sample_id = dataset.sample_ids[static_cast<size_t>(n)];
      out[mi][static_cast<size_t>(n)] = std::move(e);
    }
  }
  return out;
}

SeparationSets build_separation_sets(
    const FoldEnsemble& ensemble, const LabeledDataset& dataset,
    const std::vector<std::vector<ExplanationMap>>& explanations, const DistanceKind& kind) {
  if (ensemble.models.empty()) throw ConfigError("build_separation_sets: empty ensemble");
  if (static_cast<int>(ensemble.blocks.size()) != ensemble.k ||
      static_cast<int>(ensemble.models.size()) != ensemble.k) {
    throw ConfigError("build_separation_sets: ensemble k mismatch");
  }

  // Cache predictions per (model, sample).
  std::vector<std::vector<int>> preds(ensemble.models.size());
  for (size_t mi = 0; mi < ensemble.models.size(); ++mi) {
    preds[mi].resize(static_cast<size_t>(dataset.size()));
    for (int n = 0; n < dataset.size(); ++n) {
      preds[mi][static_cast<size_t>(n)] = explanations[mi][static_cast<size_t>(n)].predicted_class;
    }
  }

  SeparationSets sets;
  for (int n = 0; n < dataset.size(); ++n) {
    int y = dataset.labels[static_cast<size_t>(n)];
    int j = block_of(ensemble, n);  // the one model NOT trained on sample n
    for (int i = 0; i < ensemble.k; ++i) {
      if (i == j) continue;
      bool i_correct = preds[static_cast<size_t>(i)][static_cast<size_t>(n)] == y;
      bool j_correct = preds[static_cast<size_t>(j)][static_cast<size_t>(n)] == y;
      if (!i_correct && !j_correct) {
        ++sets.skipped_pairs;
        continue;
      }
      double d;
      try {
        d = distance(kind, explanations[static_cast<size_t>(i)][static_cast<size_t>(n)],
                     explanations[static_cast<size_t>(j)][static_cast<size_t>(n)]);
      } catch (const DegenerateInputError&) {
        ++sets.degenerate_pairs;
        continue;
      }
      if (i_correct && j_correct) {
        sets.s_equal.push_back(d);
        sets.provenance_equal.emplace_back(n, i, j);
      } else {
        sets.s_diff.push_back(d);
        sets.provenance_diff.emplace_back(n, i, j);
      }
    }
  }
  return sets;
}

SeparationSets build_separation_sets(const FoldEnsemble& ensemble, const LabeledDataset& dataset,
                                     Method method, const DistanceKind& kind,
                                     const AttributionConfig& cfg) {
  if (ensemble.models.empty()) throw ConfigError("build_separation_sets: empty ensemble");
  return build_separation_sets(ensemble, dataset, explain_all(ensemble, dataset, method, cfg),
                               kind);
}

}  // namespace expeval
