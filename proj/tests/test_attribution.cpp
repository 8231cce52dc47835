#include <cmath>

#include <doctest.h>

#include "expeval/attribution.hpp"
#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

using namespace expeval;

namespace {

Tensor random_input(Shape3 s, uint64_t seed, double lo = 0.0, double hi = 1.0) {
  Tensor x({s.c, s.h, s.w});
  Rng rng(seed);
  for (int i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo, hi);
  return x;
}

}  // namespace

TEST_CASE("saliency equals the channel max of absolute input gradients") {
  Model model("conv:3:3|relu|flatten|dense:2", {1, 7, 7}, 3);
  Tensor x = random_input({1, 7, 7}, 8);
  ExplanationMap m = saliency(model, x, 1);
  REQUIRE(m.values.shape() == std::vector<int>{7, 7});

  Tensor grad = grad_wrt_input(model, x, 1);
  for (int p = 0; p < 49; ++p) {
    CHECK(m.values[p] == doctest::Approx(std::fabs(grad[p])).epsilon(1e-12));
  }
}

TEST_CASE("gradient-input equals |grad * x| summed over channels") {
  Model model("flatten|dense:3", {1, 5, 5}, 9);
  Tensor x = random_input({1, 5, 5}, 10, -1.0, 1.0);
  ExplanationMap m = gradient_input(model, x, 2);
  Tensor grad = grad_wrt_input(model, x, 2);
  for (int p = 0; p < 25; ++p) {
    CHECK(m.values[p] == doctest::Approx(std::fabs(grad[p] * x[p])).epsilon(1e-12));
  }
}

TEST_CASE("integrated gradients satisfies completeness on ReLU nets") {
  // The shipped map stores per-pixel |phi|. With non-negative weights, bias,
  // and input, every phi is non-negative, so the absolute value is the
  // identity and completeness is visible on the map itself.
  AttributionConfig cfg;
  cfg.ig_steps = 60;
  int checked = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    Model model("conv:2:3|relu|flatten|dense:2", {1, 8, 8}, seed);
    for (int li = 0; li < model.layer_count(); ++li) {
      for (Tensor& p : model.params(li)) {
        for (int i = 0; i < p.size(); ++i) p[i] = std::fabs(p[i]);
      }
    }
    Tensor x = random_input({1, 8, 8}, seed + 100);
    for (int cls = 0; cls < 2; ++cls) {
      Tensor zero(x.shape(), cfg.ig_baseline);
      double fx = forward(model, x).logits()[cls];
      double f0 = forward(model, zero).logits()[cls];
      double target = fx - f0;
      ExplanationMap ig = integrated_gradients(model, x, cls, cfg);
      double total = ig.values.sum();
      CAPTURE(seed);
      CAPTURE(cls);
      CHECK(std::fabs(total - target) <= 5e-2 * std::max(1.0, std::fabs(target)));
      ++checked;
    }
  }
  CHECK(checked == 10);
}

TEST_CASE("linear model: integrated gradients collapses to gradient-input") {
  AttributionConfig cfg;
  Model model("flatten|dense:3", {1, 6, 6}, 21);
  Tensor x = random_input({1, 6, 6}, 22, -1.0, 1.0);
  for (int cls = 0; cls < 3; ++cls) {
    ExplanationMap gi = gradient_input(model, x, cls);
    ExplanationMap ig = integrated_gradients(model, x, cls, cfg);
    for (int p = 0; p < 36; ++p) {
      CHECK(std::fabs(ig.values[p] - gi.values[p]) <= 1e-9);
    }
  }
}

TEST_CASE("linear model: smoothgrad collapses to saliency") {
  AttributionConfig cfg;
  cfg.rng_seed = 5;
  Model model("flatten|dense:2", {1, 5, 5}, 31);
  Tensor x = random_input({1, 5, 5}, 32);
  ExplanationMap sm = saliency(model, x, 0);
  ExplanationMap sg = smoothgrad(model, x, 0, cfg);
  for (int p = 0; p < 25; ++p) {
    CHECK(std::fabs(sg.values[p] - sm.values[p]) <= 1e-9);
  }
}

TEST_CASE("smoothgrad is seeded") {
  AttributionConfig a, b;
  a.rng_seed = 1;
  b.rng_seed = 2;
  Model model("conv:2:3|relu|flatten|dense:2", {1, 7, 7}, 6);
  Tensor x = random_input({1, 7, 7}, 7);
  ExplanationMap m1 = smoothgrad(model, x, 0, a);
  ExplanationMap m2 = smoothgrad(model, x, 0, a);
  ExplanationMap m3 = smoothgrad(model, x, 0, b);
  CHECK(m1.values == m2.values);
  CHECK(!(m1.values == m3.values));
}

TEST_CASE("grad-cam produces a non-negative full-resolution map") {
  Model model("conv:3:3|relu|avgpool:2|flatten|dense:2", {1, 10, 10}, 13);
  Tensor x = random_input({1, 10, 10}, 14);
  ExplanationMap m = grad_cam(model, x, 1);
  REQUIRE(m.values.shape() == std::vector<int>{10, 10});
  CHECK(m.values.min() >= 0.0);

  Model no_conv("flatten|dense:2", {1, 6, 6}, 13);
  CHECK_THROWS_AS(grad_cam(no_conv, random_input({1, 6, 6}, 15), 0), ConfigError);
}

TEST_CASE("bilinear upsample matches hand values (align-corners)") {
  Tensor small({2, 2}, std::vector<double>{0.0, 1.0, 2.0, 3.0});
  Tensor big = bilinear_upsample(small, 3, 3);
  REQUIRE(big.shape() == std::vector<int>{3, 3});
  CHECK(big[0] == doctest::Approx(0.0));   // corners preserved
  CHECK(big[2] == doctest::Approx(1.0));
  CHECK(big[6] == doctest::Approx(2.0));
  CHECK(big[8] == doctest::Approx(3.0));
  CHECK(big[1] == doctest::Approx(0.5));   // edge midpoints
  CHECK(big[4] == doctest::Approx(1.5));   // center = mean of all four
}

TEST_CASE("attribute dispatch tags the map with method and model id") {
  Model model("conv:2:3|relu|flatten|dense:2", {1, 7, 7}, 40);
  model.model_id = "fold3";
  Tensor x = random_input({1, 7, 7}, 41);
  for (Method m : {Method::SM, Method::GI, Method::IG, Method::SG, Method::GC}) {
    ExplanationMap e = attribute(m, model, x, 0, {});
    CHECK(e.method == m);
    CHECK(e.model_id == "fold3");
    CHECK(e.predicted_class == 0);
    CHECK(e.values.shape() == std::vector<int>{7, 7});
    CHECK(e.values.all_finite());
  }
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::SM, Method::GI, Method::IG, Method::SG, Method::GC}) {
    CHECK(parse_method(method_name(m)) == m);
  }
  CHECK(parse_method("saliency") == Method::SM);
  CHECK_THROWS_AS(parse_method("lime"), ConfigError);
}
