#include "expeval/dataset.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

Shape3 LabeledDataset::sample_shape() const {
  const auto& s = images.shape();
  return {s[1], s[2], s[3]};
}

Tensor LabeledDataset::sample(int i) const {
  Shape3 s = sample_shape();
  int stride = s.size();
  std::vector<double> data(images.data() + static_cast<ptrdiff_t>(i) * stride,
                           images.data() + static_cast<ptrdiff_t>(i + 1) * stride);
  return Tensor({s.c, s.h, s.w}, std::move(data));
}

bool LabeledDataset::operator==(const LabeledDataset& other) const {
  return images == other.images && labels == other.labels && sample_ids == other.sample_ids &&
         class_count == other.class_count && corruption_mask == other.corruption_mask;
}

namespace {

constexpr int kGlyphSide = 5;

// 5x5 stamps. The first four have well separated lit-pixel counts
// (5/13/18/25) so that even a linear readout of total intensity carries
// class signal; the shapes themselves carry the spatial signal.
const std::array<const char*, 8> kGlyphs = {
    "....."
    "....."
    "#####"
    "....."
    ".....",  // bar, 5 px

    "#...#"
    "#...#"
    "#####"
    "#...#"
    "#...#",  // H, 13 px

    "#####"
    "##..#"
    "#...#"
    "#..##"
    "#####",  // ring, 18 px

    "#####"
    "#####"
    "#####"
    "#####"
    "#####",  // block, 25 px

    "..#.."
    "..#.."
    "#####"
    "..#.."
    "..#..",  // cross, 9 px

    "#...."
    "##..."
    "###.."
    "####."
    "#####",  // triangle, 15 px

    "#####"
    "#...."
    "#...."
    "#...."
    "#....",  // corner, 9 px

    "#.#.#"
    ".#.#."
    "#.#.#"
    ".#.#."
    "#.#.#",  // checker, 13 px
};

constexpr double kBackgroundAmp = 0.10;
constexpr double kGlyphValue = 0.95;

// A fraction of samples carries a degraded glyph rendering: each lit pixel
// survives only with probability 1 - kOcclusionDrop. Heavier glyphs then
// overlap lighter ones in total mass, which gives the task an irreducible
// error floor and makes trained models disagree on genuinely ambiguous
// samples instead of only on background-noise flukes.
constexpr double kHardFraction = 0.16;
constexpr double kOcclusionDrop = 0.35;

}  // namespace

LabeledDataset gen_shapes(int n, int size, int classes, uint64_t seed) {
  if (classes < 2 || classes > 8) {
    throw ConfigError("gen_shapes: classes must be in [2, 8], got " + std::to_string(classes));
  }
  if (size < 8) throw ConfigError("gen_shapes: size must be >= 8, got " + std::to_string(size));
  if (n <= 0) throw ConfigError("gen_shapes: n must be positive");

  Rng rng(seed);
  LabeledDataset data;
  data.class_count = classes;
  data.images = Tensor({n, 1, size, size});
  data.labels.resize(static_cast<size_t>(n));
  data.sample_ids.resize(static_cast<size_t>(n));

  // Balanced labels, then a seeded shuffle.
  for (int i = 0; i < n; ++i) data.labels[static_cast<size_t>(i)] = i % classes;
  rng.shuffle(data.labels);

  int stride = size * size;
  for (int i = 0; i < n; ++i) {
    double* img = data.images.data() + static_cast<ptrdiff_t>(i) * stride;
    for (int p = 0; p < stride; ++p) img[p] = rng.uniform(0.0, kBackgroundAmp);
    const char* glyph = kGlyphs[static_cast<size_t>(data.labels[static_cast<size_t>(i)])];
    int gy = rng.uniform_int(size - kGlyphSide + 1);
    int gx = rng.uniform_int(size - kGlyphSide + 1);
    bool hard = rng.uniform() < kHardFraction;
    for (int y = 0; y < kGlyphSide; ++y) {
      for (int x = 0; x < kGlyphSide; ++x) {
        if (glyph[y * kGlyphSide + x] != '#') continue;
        if (hard && rng.uniform() < kOcclusionDrop) continue;
        img[(gy + y) * size + gx + x] = kGlyphValue;
      }
    }
    data.sample_ids[static_cast<size_t>(i)] = "s" + std::to_string(i);
  }
  return data;
}

LabeledDataset subset(const LabeledDataset& data, const std::vector<int>& indices) {
  LabeledDataset out;
  out.class_count = data.class_count;
  Shape3 s = data.sample_shape();
  int stride = s.size();
  out.images = Tensor({static_cast<int>(indices.size()), s.c, s.h, s.w});
  out.labels.reserve(indices.size());
  out.sample_ids.reserve(indices.size());
  for (size_t k = 0; k < indices.size(); ++k) {
    int i = indices[k];
    std::copy_n(data.images.data() + static_cast<ptrdiff_t>(i) * stride, stride,
                out.images.data() + static_cast<ptrdiff_t>(k) * stride);
    out.labels.push_back(data.labels[static_cast<size_t>(i)]);
    out.sample_ids.push_back(data.sample_ids[static_cast<size_t>(i)]);
    if (!data.corruption_mask.empty()) {
      out.corruption_mask.push_back(data.corruption_mask[static_cast<size_t>(i)]);
    }
  }
  return out;
}

TrainTestSplit split_train_test(const LabeledDataset& data, double test_fraction, uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw ConfigError("split_train_test: test fraction must be in [0, 1)");
  }
  // Per-class shuffle, tail goes to test.
  std::vector<std::vector<int>> by_class(static_cast<size_t>(data.class_count));
  for (int i = 0; i < data.size(); ++i) {
    by_class[static_cast<size_t>(data.labels[static_cast<size_t>(i)])].push_back(i);
  }
  std::vector<int> train_idx, test_idx;
  for (size_t c = 0; c < by_class.size(); ++c) {
    Rng rng(Rng::derive(seed, c));
    auto& idx = by_class[c];
    rng.shuffle(idx);
    int n_test = static_cast<int>(test_fraction * static_cast<double>(idx.size()) + 0.5);
    for (size_t j = 0; j < idx.size(); ++j) {
      (static_cast<int>(j) < n_test ? test_idx : train_idx).push_back(idx[j]);
    }
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {subset(data, train_idx), subset(data, test_idx)};
}

double accuracy(const Model& model, const LabeledDataset& data) {
  if (data.size() == 0) throw ConfigError("accuracy: empty dataset");
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    if (argmax(forward(model, data.sample(i)).logits()) == data.labels[static_cast<size_t>(i)]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / data.size();
}

}  // namespace expeval
