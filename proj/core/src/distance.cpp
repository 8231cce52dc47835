#include "expeval/distance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "expeval/errors.hpp"

namespace expeval {

DistanceKind parse_distance(const std::string& name) {
  if (name == "spearman" || name == "spearman_abs") return {DistanceId::SpearmanAbs};
  if (name == "l1") return {DistanceId::L1};
  if (name == "l2") return {DistanceId::L2};
  if (name == "ssim") return {DistanceId::Ssim};
  if (name == "dice") return {DistanceId::Dice};
  throw ConfigError("unknown distance kind '" + name + "'");
}

std::string distance_name(const DistanceKind& kind) {
  switch (kind.id) {
    case DistanceId::SpearmanAbs: return "spearman_abs";
    case DistanceId::L1: return "l1";
    case DistanceId::L2: return "l2";
    case DistanceId::Ssim: return "ssim";
    case DistanceId::Dice: return "dice";
  }
  return "?";
}

namespace {

/// Average (fractional) ranks, 1-based.
std::vector<double> ranks(const Tensor& t) {
  int n = t.size();
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return t[a] < t[b]; });
  std::vector<double> r(static_cast<size_t>(n));
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && t[order[static_cast<size_t>(j + 1)]] == t[order[static_cast<size_t>(i)]]) {
      ++j;
    }
    double avg = 0.5 * (i + j) + 1.0;
    for (int k = i; k <= j; ++k) r[static_cast<size_t>(order[static_cast<size_t>(k)])] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, va = 0.0, vb = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double da = a[i] - ma;
    double db = b[i] - mb;
    num += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) {
    throw DegenerateInputError("spearman: constant input (zero rank variance)");
  }
  return num / std::sqrt(va * vb);
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + Tensor::shape_str(a.shape()) +
                     " vs " + Tensor::shape_str(b.shape()));
  }
}

double ssim_value(const Tensor& a, const Tensor& b) {
  // Maps are 2-D (H x W); sliding uniform window, valid positions only.
  int h = a.shape()[0];
  int w = a.shape().size() > 1 ? a.shape()[1] : 1;
  int win = std::min({7, h, w});
  double lo = std::min(a.min(), b.min());
  double hi = std::max(a.max(), b.max());
  double range = hi - lo;
  if (range <= 0.0) {
    throw DegenerateInputError("ssim: both maps constant (zero joint dynamic range)");
  }
  double c1 = 0.01 * range * 0.01 * range;
  double c2 = 0.03 * range * 0.03 * range;
  double inv = 1.0 / (win * win);
  double total = 0.0;
  int count = 0;
  for (int y = 0; y + win <= h; ++y) {
    for (int x = 0; x + win <= w; ++x) {
      double ma = 0.0, mb = 0.0;
      for (int dy = 0; dy < win; ++dy) {
        for (int dx = 0; dx < win; ++dx) {
          ma += a[(y + dy) * w + x + dx];
          mb += b[(y + dy) * w + x + dx];
        }
      }
      ma *= inv;
      mb *= inv;
      double va = 0.0, vb = 0.0, cov = 0.0;
      for (int dy = 0; dy < win; ++dy) {
        for (int dx = 0; dx < win; ++dx) {
          double da = a[(y + dy) * w + x + dx] - ma;
          double db = b[(y + dy) * w + x + dx] - mb;
          va += da * da;
          vb += db * db;
          cov += da * db;
        }
      }
      va *= inv;
      vb *= inv;
      cov *= inv;
      total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
               ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / count;
}

double dice_distance(const Tensor& a, const Tensor& b, double quantile) {
  if (quantile <= 0.0 || quantile >= 1.0) {
    throw ConfigError("dice: threshold quantile must be in (0, 1)");
  }
  int n = a.size();
  auto threshold = [&](const Tensor& t) {
    std::vector<double> sorted(t.values());
    std::sort(sorted.begin(), sorted.end());
    int idx = std::min(n - 1, static_cast<int>(quantile * n));
    return sorted[static_cast<size_t>(idx)];
  };
  double ta = threshold(a);
  double tb = threshold(b);
  int ca = 0, cb = 0, inter = 0;
  for (int i = 0; i < n; ++i) {
    bool ia = a[i] > ta;
    bool ib = b[i] > tb;
    ca += ia;
    cb += ib;
    inter += ia && ib;
  }
  if (ca + cb == 0) {
    throw DegenerateInputError("dice: no pixels above the threshold quantile in either map");
  }
  return 1.0 - 2.0 * inter / static_cast<double>(ca + cb);
}

}  // namespace

double spearman_rho(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "spearman");
  if (a.size() < 2) throw ConfigError("spearman: needs at least 2 elements");
  return pearson(ranks(a), ranks(b));
}

double distance(const DistanceKind& kind, const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "distance");
  switch (kind.id) {
    case DistanceId::SpearmanAbs:
      return 1.0 - std::fabs(spearman_rho(a, b));
    case DistanceId::L1: {
      double s = 0.0;
      for (int i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
      return s;
    }
    case DistanceId::L2: {
      double s = 0.0;
      for (int i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case DistanceId::Ssim:
      return 1.0 - ssim_value(a, b);
    case DistanceId::Dice:
      return dice_distance(a, b, kind.dice_threshold);
  }
  throw ConfigError("distance: unhandled kind");
}

double distance(const DistanceKind& kind, const ExplanationMap& a, const ExplanationMap& b) {
  try {
    return distance(kind, a.values, b.values);
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(std::string(e.what()) + " (sample '" + a.sample_id + "')");
  }
}

}  // namespace expeval
