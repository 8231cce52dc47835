#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "expeval/distance.hpp"
#include "expeval/tensor.hpp"

namespace expeval {

struct SanityReport {
  std::vector<std::pair<int, double>> distance_series;  // (step index, distance)
  double monotone_fraction = 0.0;  // fraction of non-decreasing consecutive steps
  double spearman_vs_index = 0.0;
  bool passed = false;
};

using DistanceFn = std::function<double(const Tensor&, const Tensor&)>;

/// Slides a Gaussian bump diagonally across a size x size image in `steps`
/// interpolations and measures distance(first, step). A fixed low-amplitude
/// background texture keeps ranks informative away from the bump. Passes iff
/// the series grows monotonically (rank correlation with the step index
/// >= 0.99).
SanityReport sanity_spatial(const DistanceFn& dist, int image_size, int steps);
SanityReport sanity_spatial(const DistanceKind& kind, int image_size, int steps);

/// Adds seeded isotropic Gaussian noise at each sigma (`repeats` draws each)
/// and correlates sigma with the mean distance. Passes at rank correlation
/// >= 0.95.
SanityReport sanity_noise(const DistanceFn& dist, const Tensor& base,
                          const std::vector<double>& sigmas, int repeats, uint64_t seed = 0);
SanityReport sanity_noise(const DistanceKind& kind, const Tensor& base,
                          const std::vector<double>& sigmas, int repeats, uint64_t seed = 0);

/// The mask used by sanity_spatial at interpolation t in [0, 1].
Tensor sanity_mask(int image_size, double t);

}  // namespace expeval
