#pragma once

#include <cstdint>
#include <string>

#include "expeval/model.hpp"
#include "expeval/tensor.hpp"

namespace expeval {

enum class Method { SM, GI, IG, SG, GC };

Method parse_method(const std::string& name);
std::string method_name(Method m);

/// Per-pixel relevance scores for one (model, sample) pair. Always H x W,
/// channel-reduced.
struct ExplanationMap {
  Tensor values;
  Method method = Method::SM;
  std::string model_id;
  std::string sample_id;
  int predicted_class = 0;
};

struct AttributionConfig {
  int ig_steps = 60;
  double ig_baseline = 0.0;  // scalar baseline
  int sg_samples = 60;
  double sg_sigma = 0.2;
  /// Average |gradient| rather than the signed gradient in SmoothGrad.
  bool sg_absolute = true;
  uint64_t rng_seed = 0;
};

/// |d logit / dx|, max-abs over channels.
ExplanationMap saliency(const Model& model, const Tensor& x, int class_index);

/// (d logit / dx) * x, summed over channels, then absolute value.
ExplanationMap gradient_input(const Model& model, const Tensor& x, int class_index);

/// Trapezoidal path integral of gradients from the baseline to x, times
/// (x - baseline); summed over channels, then absolute value.
ExplanationMap integrated_gradients(const Model& model, const Tensor& x, int class_index,
                                    const AttributionConfig& cfg);

/// Seeded mean of gradients at Gaussian-perturbed inputs, max-abs over
/// channels.
ExplanationMap smoothgrad(const Model& model, const Tensor& x, int class_index,
                          const AttributionConfig& cfg);

/// ReLU of the gradient-weighted sum of the last conv layer's feature maps,
/// bilinearly upsampled to input resolution.
ExplanationMap grad_cam(const Model& model, const Tensor& x, int class_index);

/// Dispatch by method.
ExplanationMap attribute(Method method, const Model& model, const Tensor& x, int class_index,
                         const AttributionConfig& cfg);

/// Bilinear resize of an H x W map (align-corners).
Tensor bilinear_upsample(const Tensor& map, int out_h, int out_w);

}  // namespace expeval
