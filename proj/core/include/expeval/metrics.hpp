#pragma once

#include <cstdint>
#include <vector>

#include "expeval/attribution.hpp"
#include "expeval/cross_training.hpp"
#include "expeval/distance.hpp"
#include "expeval/model.hpp"

namespace expeval {

struct ThresholdPoint {
  double gamma = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
};

struct RecoResult {
  double reco = 0.0;          // max balanced accuracy, clamped to [0, 1]
  double best_threshold = 0.0;
  std::vector<ThresholdPoint> scan;  // one point per candidate threshold
  double reco_auc = 0.0;      // trapezoidal integral over gamma, range-normalized
};

/// Balanced-accuracy threshold scan over S = S= u S≠, strict inequalities,
/// zero-denominator ratios defined as 0.
RecoResult reco(const SeparationSets& sets);

struct MegeResult {
  double mege = 0.0;  // 1 / (1 + mean(S=))
  double mean_s_equal = 0.0;
  int count = 0;
};

MegeResult mege(const SeparationSets& sets);

enum class CorrelationKind { Pearson, Spearman };

struct FidelityConfig {
  double subset_fraction = 0.15;
  int num_subsets = 64;
  double baseline = 0.0;
  CorrelationKind correlation = CorrelationKind::Pearson;
  /// Correlate against softmax probability drops instead of logit drops.
  bool use_softmax = false;
  uint64_t seed = 0;
};

/// Correlation between attribution mass of random pixel subsets and the
/// model's score drop when those pixels are set to the baseline.
double fidelity_mu(const Model& model, const Tensor& x, const ExplanationMap& explanation,
                   const FidelityConfig& cfg);

struct StabilityConfig {
  double radius = 0.1;  // l1 ball radius
  int num_neighbors = 32;
  DistanceKind inner_distance = {DistanceId::SpearmanAbs};
  uint64_t seed = 0;
};

/// Monte-Carlo mean explanation distance over a uniform l1 neighborhood.
double stability_savg(const Model& model, const Tensor& x, Method method,
                      const StabilityConfig& cfg, const AttributionConfig& attr_cfg = {});

struct CounterexampleResult {
  double kl_consistent = 0.0;    // closed-form Gaussian KL
  double kl_inconsistent = 0.0;
  double w1_consistent = 0.0;    // empirical 1-D Wasserstein-1
  double w1_inconsistent = 0.0;
  double reco_consistent = 0.0;
  double reco_inconsistent = 0.0;
};

/// Samples a well-ordered (consistent) S=/S≠ pair from two Gaussians and the
/// mirrored (inconsistent) pair, then shows that KL and W1 cannot tell them
/// apart while the balanced-accuracy scan can.
CounterexampleResult appendix_counterexample_oracle(double mu1, double mu2, double sigma1,
                                                    double sigma2, int n, uint64_t seed);

/// KL(N(mu_a, sigma_a) || N(mu_b, sigma_b)), closed form.
double gaussian_kl(double mu_a, double sigma_a, double mu_b, double sigma_b);

/// Empirical W1 between two equally sized samples (mean |quantile gap|).
double empirical_w1(std::vector<double> a, std::vector<double> b);

}  // namespace expeval
