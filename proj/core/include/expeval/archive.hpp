#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expeval/attribution.hpp"
#include "expeval/tensor.hpp"

namespace expeval {

/// On-disk cache of explanation maps for one (model, method) pair:
/// a JSON header (magic "XTA1") followed by contiguous little-endian
/// float32 maps in sample_ids order.
struct ExplanationArchive {
  std::vector<int> map_shape;  // e.g. {H, W}
  Method method = Method::SM;
  std::string model_id;
  std::vector<std::string> sample_ids;
  std::vector<int> predicted_classes;  // aligned with sample_ids
  std::string created;
  uint64_t seed = 0;
  /// Concatenated map values, float32 precision, sample-major.
  std::vector<float> payload;

  int map_size() const;
  int sample_count() const { return static_cast<int>(sample_ids.size()); }
  ExplanationMap map(int index) const;

  static ExplanationArchive from_maps(const std::vector<ExplanationMap>& maps,
                                      const std::string& model_id, uint64_t seed);
  bool operator==(const ExplanationArchive& other) const = default;
};

void write_archive(const ExplanationArchive& archive, const std::string& path);
ExplanationArchive read_archive(const std::string& path);

}  // namespace expeval
