#include "expeval/attribution.hpp"

#include <cmath>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

Method parse_method(const std::string& name) {
  if (name == "SM" || name == "saliency") return Method::SM;
  if (name == "GI" || name == "gradient-input") return Method::GI;
  if (name == "IG" || name == "integrated-gradients") return Method::IG;
  if (name == "SG" || name == "smoothgrad") return Method::SG;
  if (name == "GC" || name == "grad-cam") return Method::GC;
  throw ConfigError("unknown attribution method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::SM: return "SM";
    case Method::GI: return "GI";
    case Method::IG: return "IG";
    case Method::SG: return "SG";
    case Method::GC: return "GC";
  }
  return "?";
}

namespace {

Shape3 input_shape_of(const Model& model, const Tensor& x) {
  Shape3 s = model.input_shape();
  if (x.size() != s.size()) {
    throw ShapeError("attribution: input shape " + Tensor::shape_str(x.shape()) +
                     " does not match model input");
  }
  return s;
}

/// max over channels of |t|, per pixel.
Tensor reduce_max_abs(const Tensor& t, Shape3 s) {
  Tensor out({s.h, s.w});
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      double best = 0.0;
      for (int c = 0; c < s.c; ++c) {
        best = std::max(best, std::fabs(t[(c * s.h + y) * s.w + x]));
      }
      out[y * s.w + x] = best;
    }
  }
  return out;
}

/// |sum over channels of t|, per pixel.
Tensor reduce_abs_sum(const Tensor& t, Shape3 s) {
  Tensor out({s.h, s.w});
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      double acc = 0.0;
      for (int c = 0; c < s.c; ++c) acc += t[(c * s.h + y) * s.w + x];
      out[y * s.w + x] = std::fabs(acc);
    }
  }
  return out;
}

ExplanationMap wrap(Tensor values, Method method, int class_index) {
  ExplanationMap m;
  m.values = std::move(values);
  m.method = method;
  m.predicted_class = class_index;
  return m;
}

}  // namespace

ExplanationMap saliency(const Model& model, const Tensor& x, int class_index) {
  Shape3 s = input_shape_of(model, x);
  Tensor g = grad_wrt_input(model, x, class_index);
  return wrap(reduce_max_abs(g, s), Method::SM, class_index);
}

ExplanationMap gradient_input(const Model& model, const Tensor& x, int class_index) {
  Shape3 s = input_shape_of(model, x);
  Tensor g = grad_wrt_input(model, x, class_index);
  for (int i = 0; i < g.size(); ++i) g[i] *= x[i];
  return wrap(reduce_abs_sum(g, s), Method::GI, class_index);
}

ExplanationMap integrated_gradients(const Model& model, const Tensor& x, int class_index,
                                    const AttributionConfig& cfg) {
  if (cfg.ig_steps < 2) {
    throw ConfigError("integrated_gradients: needs at least 2 steps, got " +
                      std::to_string(cfg.ig_steps));
  }
  Shape3 s = input_shape_of(model, x);
  int m = cfg.ig_steps;
  Tensor mean_grad({s.c, s.h, s.w});
  Tensor point(x.shape());
  for (int step = 0; step < m; ++step) {
    double alpha = static_cast<double>(step) / (m - 1);
    // Trapezoidal rule: endpoint gradients get half weight.
    double weight = (step == 0 || step == m - 1) ? 0.5 : 1.0;
    for (int i = 0; i < x.size(); ++i) {
      point[i] = cfg.ig_baseline + alpha * (x[i] - cfg.ig_baseline);
    }
    Tensor g = grad_wrt_input(model, point, class_index);
    for (int i = 0; i < g.size(); ++i) mean_grad[i] += weight * g[i];
  }
  double norm = 1.0 / (m - 1);
  for (int i = 0; i < mean_grad.size(); ++i) {
    mean_grad[i] *= norm * (x[i] - cfg.ig_baseline);
  }
  return wrap(reduce_abs_sum(mean_grad, s), Method::IG, class_index);
}

ExplanationMap smoothgrad(const Model& model, const Tensor& x, int class_index,
                          const AttributionConfig& cfg) {
  if (cfg.sg_samples < 1) throw ConfigError("smoothgrad: needs at least 1 sample");
  if (cfg.sg_sigma <= 0.0) throw ConfigError("smoothgrad: sigma must be positive");
  Shape3 s = input_shape_of(model, x);
  Rng rng(Rng::derive(cfg.rng_seed, 0x5347ULL));
  Tensor noisy(x.shape());
  if (cfg.sg_absolute) {
    // Mean of per-draw |gradient| maps.
    Tensor mean({s.h, s.w});
    for (int draw = 0; draw < cfg.sg_samples; ++draw) {
      for (int i = 0; i < x.size(); ++i) noisy[i] = x[i] + cfg.sg_sigma * rng.gaussian();
      Tensor reduced = reduce_max_abs(grad_wrt_input(model, noisy, class_index), s);
      for (int i = 0; i < mean.size(); ++i) mean[i] += reduced[i];
    }
    for (int i = 0; i < mean.size(); ++i) mean[i] /= cfg.sg_samples;
    return wrap(std::move(mean), Method::SG, class_index);
  }
  // Signed mean gradient, reduced at the end.
  Tensor mean_grad({s.c, s.h, s.w});
  for (int draw = 0; draw < cfg.sg_samples; ++draw) {
    for (int i = 0; i < x.size(); ++i) noisy[i] = x[i] + cfg.sg_sigma * rng.gaussian();
    Tensor g = grad_wrt_input(model, noisy, class_index);
    for (int i = 0; i < g.size(); ++i) mean_grad[i] += g[i];
  }
  for (int i = 0; i < mean_grad.size(); ++i) mean_grad[i] /= cfg.sg_samples;
  return wrap(reduce_max_abs(mean_grad, s), Method::SG, class_index);
}

Tensor bilinear_upsample(const Tensor& map, int out_h, int out_w) {
  int in_h = map.shape()[0];
  int in_w = map.shape()[1];
  Tensor out({out_h, out_w});
  double sy = out_h > 1 ? static_cast<double>(in_h - 1) / (out_h - 1) : 0.0;
  double sx = out_w > 1 ? static_cast<double>(in_w - 1) / (out_w - 1) : 0.0;
  for (int y = 0; y < out_h; ++y) {
    double fy = y * sy;
    int y0 = static_cast<int>(fy);
    int y1 = std::min(y0 + 1, in_h - 1);
    double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      double fx = x * sx;
      int x0 = static_cast<int>(fx);
      int x1 = std::min(x0 + 1, in_w - 1);
      double wx = fx - x0;
      double v = (1 - wy) * ((1 - wx) * map[y0 * in_w + x0] + wx * map[y0 * in_w + x1]) +
                 wy * ((1 - wx) * map[y1 * in_w + x0] + wx * map[y1 * in_w + x1]);
      out[y * out_w + x] = v;
    }
  }
  return out;
}

ExplanationMap grad_cam(const Model& model, const Tensor& x, int class_index) {
  Shape3 s = input_shape_of(model, x);
  int conv = model.last_conv_layer();
  if (conv < 0) {
    throw ConfigError("grad_cam: model '" + model.architecture_id() + "' has no conv layer");
  }
  ForwardTrace trace = forward(model, x);
  Tensor out_grad(trace.logits().shape());
  if (class_index < 0 || class_index >= model.class_count()) {
    throw ConfigError("grad_cam: class index out of range");
  }
  out_grad[class_index] = 1.0;
  Gradients g = backward(model, x, trace, out_grad);
  const Tensor& maps = trace.activations[static_cast<size_t>(conv)];
  const Tensor& grads = g.activation_grads[static_cast<size_t>(conv)];
  Shape3 ms = model.layer_output_shapes()[static_cast<size_t>(conv)];
  int plane = ms.h * ms.w;

  Tensor cam({ms.h, ms.w});
  for (int f = 0; f < ms.c; ++f) {
    double alpha = 0.0;
    for (int p = 0; p < plane; ++p) alpha += grads[f * plane + p];
    alpha /= plane;
    for (int p = 0; p < plane; ++p) cam[p] += alpha * maps[f * plane + p];
  }
  for (int p = 0; p < plane; ++p) cam[p] = cam[p] > 0.0 ? cam[p] : 0.0;
  return wrap(bilinear_upsample(cam, s.h, s.w), Method::GC, class_index);
}

ExplanationMap attribute(Method method, const Model& model, const Tensor& x, int class_index,
                         const AttributionConfig& cfg) {
  ExplanationMap out;
  switch (method) {
    case Method::SM: out = saliency(model, x, class_index); break;
    case Method::GI: out = gradient_input(model, x, class_index); break;
    case Method::IG: out = integrated_gradients(model, x, class_index, cfg); break;
    case Method::SG: out = smoothgrad(model, x, class_index, cfg); break;
    case Method::GC: out = grad_cam(model, x, class_index); break;
  }
  out.model_id = model.model_id;
  return out;
}

}  // namespace expeval
