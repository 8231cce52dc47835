#pragma once

#include <cstdint>

#include "expeval/dataset.hpp"
#include "expeval/model.hpp"

namespace expeval {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  uint64_t seed = 0;
};

struct TrainStats {
  double final_loss = 0.0;
  double train_accuracy = 0.0;
};

/// Mini-batch SGD (with classical momentum) on softmax cross-entropy.
/// Deterministic given (model, data, cfg). Throws DivergenceError with
/// diagnostics if the loss goes non-finite.
Model train(const Model& model, const LabeledDataset& data, const TrainConfig& cfg,
            TrainStats* stats = nullptr);

/// Mean softmax cross-entropy of the model on the dataset.
double cross_entropy_loss(const Model& model, const LabeledDataset& data);

}  // namespace expeval
