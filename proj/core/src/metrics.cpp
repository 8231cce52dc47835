#include "expeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

RecoResult reco(const SeparationSets& sets) {
  if (sets.s_equal.empty()) throw UndefinedMetricError("reco: S= is empty");
  if (sets.s_diff.empty()) throw UndefinedMetricError("reco: S!= is empty");

  std::vector<double> eq = sets.s_equal;
  std::vector<double> df = sets.s_diff;
  std::sort(eq.begin(), eq.end());
  std::sort(df.begin(), df.end());

  std::vector<double> gammas;
  gammas.reserve(eq.size() + df.size());
  gammas.insert(gammas.end(), eq.begin(), eq.end());
  gammas.insert(gammas.end(), df.begin(), df.end());
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  auto count_below = [](const std::vector<double>& v, double g) {
    return static_cast<double>(std::lower_bound(v.begin(), v.end(), g) - v.begin());
  };
  auto count_above = [](const std::vector<double>& v, double g) {
    return static_cast<double>(v.end() - std::upper_bound(v.begin(), v.end(), g));
  };

  RecoResult result;
  result.scan.reserve(gammas.size());
  double best = -2.0;
  for (double g : gammas) {
    double eq_below = count_below(eq, g);
    double df_below = count_below(df, g);
    double eq_above = count_above(eq, g);
    double df_above = count_above(df, g);
    double below = eq_below + df_below;
    double above = eq_above + df_above;
    double tpr = below > 0.0 ? eq_below / below : 0.0;
    double tnr = above > 0.0 ? df_above / above : 0.0;
    result.scan.push_back({g, tpr, tnr});
    double ba = tpr + tnr - 1.0;
    if (ba > best) {
      best = ba;
      result.best_threshold = g;
    }
  }
  result.reco = std::clamp(best, 0.0, 1.0);

  // Trapezoidal integral of the raw balanced accuracy over the gamma range.
  double gamma_range = gammas.back() - gammas.front();
  if (gammas.size() >= 2 && gamma_range > 0.0) {
    double area = 0.0;
    for (size_t i = 1; i < result.scan.size(); ++i) {
      double ba0 = result.scan[i - 1].tpr + result.scan[i - 1].tnr - 1.0;
      double ba1 = result.scan[i].tpr + result.scan[i].tnr - 1.0;
      area += 0.5 * (ba0 + ba1) * (result.scan[i].gamma - result.scan[i - 1].gamma);
    }
    result.reco_auc = area / gamma_range;
  } else {
    result.reco_auc = result.reco;
  }
  return result;
}

MegeResult mege(const SeparationSets& sets) {
  if (sets.s_equal.empty()) throw UndefinedMetricError("mege: S= is empty");
  MegeResult r;
  r.count = static_cast<int>(sets.s_equal.size());
  r.mean_s_equal = std::accumulate(sets.s_equal.begin(), sets.s_equal.end(), 0.0) / r.count;
  r.mege = 1.0 / (1.0 + r.mean_s_equal);
  return r;
}

namespace {

double correlate(CorrelationKind kind, const std::vector<double>& a,
                 const std::vector<double>& b) {
  Tensor ta({static_cast<int>(a.size())}, a);
  Tensor tb({static_cast<int>(b.size())}, b);
  if (kind == CorrelationKind::Spearman) return spearman_rho(ta, tb);
  size_t n = a.size();
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double num = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0.0 || vb <= 0.0) {
    throw DegenerateInputError("fidelity: zero variance in attribution or score-drop series");
  }
  return num / std::sqrt(va * vb);
}

double class_score(const Model& model, const Tensor& x, int class_index, bool use_softmax) {
  ForwardTrace trace = forward(model, x);
  const Tensor& logits = trace.logits();
  if (use_softmax) return softmax(logits)[static_cast<size_t>(class_index)];
  return logits[class_index];
}

}  // namespace

double fidelity_mu(const Model& model, const Tensor& x, const ExplanationMap& explanation,
                   const FidelityConfig& cfg) {
  Shape3 s = model.input_shape();
  if (explanation.values.size() != s.h * s.w) {
    throw ShapeError("fidelity_mu: explanation shape " +
                     Tensor::shape_str(explanation.values.shape()) +
                     " does not match the input's spatial shape");
  }
  if (cfg.num_subsets < 2) throw ConfigError("fidelity_mu: need at least 2 subsets");
  if (cfg.subset_fraction <= 0.0 || cfg.subset_fraction > 1.0) {
    throw ConfigError("fidelity_mu: subset fraction must be in (0, 1]");
  }
  int n_pixels = s.h * s.w;
  int subset_size = static_cast<int>(std::ceil(cfg.subset_fraction * n_pixels));
  int cls = explanation.predicted_class;
  double base_score = class_score(model, x, cls, cfg.use_softmax);

  Rng rng(Rng::derive(cfg.seed, 0x666964ULL));
  std::vector<int> pixels(static_cast<size_t>(n_pixels));
  std::iota(pixels.begin(), pixels.end(), 0);

  std::vector<double> attribution_mass, score_drop;
  Tensor masked(x.shape());
  for (int sub = 0; sub < cfg.num_subsets; ++sub) {
    rng.shuffle(pixels);
    masked = x;
    double mass = 0.0;
    for (int t = 0; t < subset_size; ++t) {
      int p = pixels[static_cast<size_t>(t)];
      mass += explanation.values[p];
      for (int c = 0; c < s.c; ++c) masked[c * n_pixels + p] = cfg.baseline;
    }
    attribution_mass.push_back(mass);
    score_drop.push_back(base_score - class_score(model, masked, cls, cfg.use_softmax));
  }
  return correlate(cfg.correlation, attribution_mass, score_drop);
}

double stability_savg(const Model& model, const Tensor& x, Method method,
                      const StabilityConfig& cfg, const AttributionConfig& attr_cfg) {
  if (cfg.num_neighbors < 1) throw ConfigError("stability_savg: need at least 1 neighbor");
  if (cfg.radius < 0.0) throw ConfigError("stability_savg: radius must be >= 0");

  int predicted = argmax(forward(model, x).logits());
  ExplanationMap center = attribute(method, model, x, predicted, attr_cfg);

  Rng rng(Rng::derive(cfg.seed, 0x73746162ULL));
  int d = x.size();
  Tensor z(x.shape());
  double total = 0.0;
  int used = 0;
  for (int nb = 0; nb < cfg.num_neighbors; ++nb) {
    // Uniform draw in the l1 ball: exponential spacings normalized onto the
    // simplex, random signs, radius scaled by U^(1/d).
    double sum = 0.0;
    std::vector<double> mag(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
      double u = rng.uniform();
      while (u <= 0.0) u = rng.uniform();
      mag[static_cast<size_t>(i)] = -std::log(u);
      sum += mag[static_cast<size_t>(i)];
    }
    double scale = cfg.radius * std::pow(rng.uniform(), 1.0 / d) / sum;
    for (int i = 0; i < d; ++i) {
      double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      z[i] = x[i] + sign * mag[static_cast<size_t>(i)] * scale;
    }
    int z_pred = argmax(forward(model, z).logits());
    ExplanationMap neighbor = attribute(method, model, z, z_pred, attr_cfg);
    try {
      total += distance(cfg.inner_distance, center.values, neighbor.values);
      ++used;
    } catch (const DegenerateInputError&) {
      // Degenerate neighbors are skipped and counted below.
    }
  }
  if (used == 0) {
    throw DegenerateInputError("stability_savg: all " + std::to_string(cfg.num_neighbors) +
                               " neighbor explanations were degenerate");
  }
  return total / used;
}

double gaussian_kl(double mu_a, double sigma_a, double mu_b, double sigma_b) {
  return std::log(sigma_b / sigma_a) +
         (sigma_a * sigma_a + (mu_a - mu_b) * (mu_a - mu_b)) / (2.0 * sigma_b * sigma_b) - 0.5;
}

double empirical_w1(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw ConfigError("empirical_w1: needs two equally sized non-empty samples");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double total = 0.0;
  for (size_t i = 0; i < a.size(); ++i) total += std::fabs(a[i] - b[i]);
  return total / static_cast<double>(a.size());
}

CounterexampleResult appendix_counterexample_oracle(double mu1, double mu2, double sigma1,
                                                    double sigma2, int n, uint64_t seed) {
  if (!(0.0 < mu1 && mu1 < mu2 && mu2 < 1.0)) {
    throw ConfigError("counterexample: need 0 < mu1 < mu2 < 1");
  }
  if (sigma1 <= 0.0 || sigma2 <= 0.0) throw ConfigError("counterexample: sigmas must be > 0");
  if (n < 100) throw ConfigError("counterexample: n must be >= 100");

  Rng rng(Rng::derive(seed, 0x6170726563ULL));
  std::vector<double> eq(static_cast<size_t>(n)), df(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) eq[static_cast<size_t>(i)] = mu1 + sigma1 * rng.gaussian();
  for (int i = 0; i < n; ++i) df[static_cast<size_t>(i)] = mu2 + sigma2 * rng.gaussian();
  // The inconsistent case mirrors each sample at 1/2, giving N(1-mu, sigma).
  std::vector<double> eq_m(static_cast<size_t>(n)), df_m(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    eq_m[static_cast<size_t>(i)] = 1.0 - eq[static_cast<size_t>(i)];
    df_m[static_cast<size_t>(i)] = 1.0 - df[static_cast<size_t>(i)];
  }

  CounterexampleResult r;
  r.kl_consistent = gaussian_kl(mu1, sigma1, mu2, sigma2);
  r.kl_inconsistent = gaussian_kl(1.0 - mu1, sigma1, 1.0 - mu2, sigma2);
  r.w1_consistent = empirical_w1(eq, df);
  r.w1_inconsistent = empirical_w1(eq_m, df_m);

  SeparationSets consistent;
  consistent.s_equal = eq;
  consistent.s_diff = df;
  SeparationSets inconsistent;
  inconsistent.s_equal = eq_m;
  inconsistent.s_diff = df_m;
  r.reco_consistent = reco(consistent).reco;
  r.reco_inconsistent = reco(inconsistent).reco;
  return r;
}

}  // namespace expeval
