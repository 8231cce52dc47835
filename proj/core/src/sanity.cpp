#include "expeval/sanity.hpp"

#include <cmath>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

namespace {

constexpr double kSpatialPassThreshold = 0.99;
constexpr double kNoisePassThreshold = 0.95;
constexpr double kTextureAmp = 0.02;
constexpr uint64_t kTextureSeed = 0x7370617469616cULL;

SanityReport finish(std::vector<std::pair<int, double>> series, double pass_threshold) {
  SanityReport report;
  report.distance_series = std::move(series);
  int n = static_cast<int>(report.distance_series.size());
  int ok = 0;
  for (int i = 1; i < n; ++i) {
    if (report.distance_series[static_cast<size_t>(i)].second + 1e-12 >=
        report.distance_series[static_cast<size_t>(i - 1)].second) {
      ++ok;
    }
  }
  report.monotone_fraction = n > 1 ? static_cast<double>(ok) / (n - 1) : 1.0;

  Tensor idx({n}), val({n});
  for (int i = 0; i < n; ++i) {
    idx[i] = report.distance_series[static_cast<size_t>(i)].first;
    val[i] = report.distance_series[static_cast<size_t>(i)].second;
  }
  try {
    report.spearman_vs_index = spearman_rho(idx, val);
  } catch (const DegenerateInputError&) {
    report.spearman_vs_index = 0.0;  // constant series never passes
  }
  report.passed = report.spearman_vs_index >= pass_threshold;
  return report;
}

}  // namespace

Tensor sanity_mask(int image_size, double t) {
  // Bump sliding along the diagonal between inset corners; the path is kept
  // short enough that the overlap (hence every distance kind) keeps evolving
  // through the final step instead of saturating.
  double sigma = image_size / 4.0;
  double margin = 0.375 * image_size;
  double c = margin + t * (image_size - 1 - 2.0 * margin);
  Rng rng(kTextureSeed);
  Tensor mask({image_size, image_size});
  for (int i = 0; i < mask.size(); ++i) mask[i] = rng.uniform(0.0, kTextureAmp);
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      double dy = y - c;
      double dx = x - c;
      mask[y * image_size + x] += std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
    }
  }
  return mask;
}

SanityReport sanity_spatial(const DistanceFn& dist, int image_size, int steps) {
  if (steps < 2) throw ConfigError("sanity_spatial: steps must be >= 2");
  if (image_size < 8) throw ConfigError("sanity_spatial: image size must be >= 8");
  Tensor first = sanity_mask(image_size, 0.0);
  std::vector<std::pair<int, double>> series;
  series.reserve(static_cast<size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    double t = static_cast<double>(s) / (steps - 1);
    series.emplace_back(s, dist(first, sanity_mask(image_size, t)));
  }
  return finish(std::move(series), kSpatialPassThreshold);
}

SanityReport sanity_spatial(const DistanceKind& kind, int image_size, int steps) {
  return sanity_spatial(
      [&kind](const Tensor& a, const Tensor& b) { return distance(kind, a, b); }, image_size,
      steps);
}

SanityReport sanity_noise(const DistanceFn& dist, const Tensor& base,
                          const std::vector<double>& sigmas, int repeats, uint64_t seed) {
  if (repeats < 1) throw ConfigError("sanity_noise: repeats must be >= 1");
  for (size_t i = 1; i < sigmas.size(); ++i) {
    if (sigmas[i] <= sigmas[i - 1]) {
      throw ConfigError("sanity_noise: sigmas must be strictly increasing");
    }
  }
  Rng rng(Rng::derive(seed, 0x6e6f697365ULL));
  std::vector<std::pair<int, double>> series;
  Tensor noisy(base.shape());
  for (size_t si = 0; si < sigmas.size(); ++si) {
    double total = 0.0;
    for (int r = 0; r < repeats; ++r) {
      for (int i = 0; i < base.size(); ++i) noisy[i] = base[i] + sigmas[si] * rng.gaussian();
      total += dist(base, noisy);
    }
    series.emplace_back(static_cast<int>(si), total / repeats);
  }
  return finish(std::move(series), kNoisePassThreshold);
}

SanityReport sanity_noise(const DistanceKind& kind, const Tensor& base,
                          const std::vector<double>& sigmas, int repeats, uint64_t seed) {
  return sanity_noise([&kind](const Tensor& a, const Tensor& b) { return distance(kind, a, b); },
                      base, sigmas, repeats, seed);
}

}  // namespace expeval
