#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expeval/model.hpp"
#include "expeval/tensor.hpp"

namespace expeval {

struct LabeledDataset {
  Tensor images;  // N x C x H x W, values in [0, 1]
  std::vector<int> labels;
  std::vector<std::string> sample_ids;
  int class_count = 0;
  /// Non-empty only after label inversion; 1 marks a corrupted label.
  std::vector<uint8_t> corruption_mask;

  int size() const { return static_cast<int>(labels.size()); }
  Shape3 sample_shape() const;
  Tensor sample(int i) const;  // C x H x W copy
  bool operator==(const LabeledDataset& other) const;
};

/// Procedural image classification set: one class-defining glyph stamped at a
/// random position over a uniform noise background. Classes are balanced and
/// the whole generation is seeded.
LabeledDataset gen_shapes(int n, int size, int classes, uint64_t seed);

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

/// Seeded stratified split; `test_fraction` of each class goes to test.
TrainTestSplit split_train_test(const LabeledDataset& data, double test_fraction, uint64_t seed);

/// Subset by index list, preserving order.
LabeledDataset subset(const LabeledDataset& data, const std::vector<int>& indices);

/// Fraction of samples whose argmax prediction matches the label.
double accuracy(const Model& model, const LabeledDataset& data);

/// MNIST-family IDX loader. `limit` < 0 keeps all samples.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path,
                        int limit = -1);

}  // namespace expeval
