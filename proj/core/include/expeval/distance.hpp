#pragma once

#include <string>

#include "expeval/attribution.hpp"
#include "expeval/tensor.hpp"

namespace expeval {

enum class DistanceId { SpearmanAbs, L1, L2, Ssim, Dice };

struct DistanceKind {
  DistanceId id = DistanceId::SpearmanAbs;
  /// Quantile above which a pixel counts as "area of interest" (dice only).
  double dice_threshold = 0.9;
};

DistanceKind parse_distance(const std::string& name);
std::string distance_name(const DistanceKind& kind);

/// Spearman rank correlation with average (fractional) ranks for ties,
/// computed as the Pearson correlation of the rank vectors.
/// Throws DegenerateInputError on constant input.
double spearman_rho(const Tensor& a, const Tensor& b);

/// Distance between two equally shaped maps:
///   spearman_abs: 1 - |rho|
///   l1 / l2:      norms of (a - b)
///   ssim:         1 - SSIM (window 7, C1=(0.01 L)^2, C2=(0.03 L)^2,
///                 L = joint dynamic range)
///   dice:         1 - Dice overlap of the above-quantile pixel sets
double distance(const DistanceKind& kind, const Tensor& a, const Tensor& b);

/// Same, with the sample id attached to degenerate-input errors.
double distance(const DistanceKind& kind, const ExplanationMap& a, const ExplanationMap& b);

}  // namespace expeval
