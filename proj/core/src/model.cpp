#include "expeval/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_positive(const std::string& tok, const std::string& what) {
  int v = 0;
  try {
    v = std::stoi(tok);
  } catch (const std::exception&) {
    throw ConfigError("architecture: bad " + what + " '" + tok + "'");
  }
  if (v <= 0) throw ConfigError("architecture: " + what + " must be positive, got " + tok);
  return v;
}

}  // namespace

std::string layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv2d: return "conv";
    case LayerKind::ReLU: return "relu";
    case LayerKind::AvgPool2d: return "avgpool";
    case LayerKind::Flatten: return "flatten";
  }
  return "?";
}

std::vector<LayerSpec> parse_architecture(const std::string& architecture_id) {
  std::vector<LayerSpec> specs;
  for (const std::string& part : split(architecture_id, '|')) {
    auto fields = split(part, ':');
    const std::string& name = fields[0];
    LayerSpec spec{};
    if (name == "dense") {
      if (fields.size() != 2) throw ConfigError("architecture: dense takes one argument: " + part);
      spec.kind = LayerKind::Dense;
      spec.units = parse_positive(fields[1], "dense units");
    } else if (name == "conv") {
      if (fields.size() != 3) throw ConfigError("architecture: conv takes two arguments: " + part);
      spec.kind = LayerKind::Conv2d;
      spec.filters = parse_positive(fields[1], "conv filters");
      spec.kernel = parse_positive(fields[2], "conv kernel");
    } else if (name == "relu") {
      spec.kind = LayerKind::ReLU;
    } else if (name == "avgpool") {
      if (fields.size() != 2) throw ConfigError("architecture: avgpool takes one argument: " + part);
      spec.kind = LayerKind::AvgPool2d;
      spec.pool = parse_positive(fields[1], "avgpool window");
    } else if (name == "flatten") {
      spec.kind = LayerKind::Flatten;
    } else {
      throw ConfigError("architecture: unknown layer '" + name + "'");
    }
    specs.push_back(spec);
  }
  if (specs.empty()) throw ConfigError("architecture: empty layer list");
  return specs;
}

Model::Model(std::string architecture_id, Shape3 input_shape, uint64_t seed)
    : architecture_id_(std::move(architecture_id)), input_shape_(input_shape), seed_(seed) {
  layers_ = parse_architecture(architecture_id_);
  Shape3 cur = input_shape_;
  for (size_t li = 0; li < layers_.size(); ++li) {
    const LayerSpec& spec = layers_[li];
    std::vector<Tensor> p;
    Rng rng(Rng::derive(seed_, li));
    switch (spec.kind) {
      case LayerKind::Dense: {
        int fan_in = cur.size();
        double limit = std::sqrt(6.0 / (fan_in + spec.units));
        Tensor w({spec.units, fan_in});
        for (int i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
        p = {std::move(w), Tensor({spec.units})};
        cur = {spec.units, 1, 1};
        break;
      }
      case LayerKind::Conv2d: {
        int oh = cur.h - spec.kernel + 1;
        int ow = cur.w - spec.kernel + 1;
        if (oh <= 0 || ow <= 0) {
          throw ConfigError("architecture: conv kernel " + std::to_string(spec.kernel) +
                            " does not fit input " + std::to_string(cur.h) + "x" +
                            std::to_string(cur.w) + " at layer " + std::to_string(li));
        }
        int fan_in = cur.c * spec.kernel * spec.kernel;
        int fan_out = spec.filters * spec.kernel * spec.kernel;
        double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Tensor w({spec.filters, cur.c, spec.kernel, spec.kernel});
        for (int i = 0; i < w.size(); ++i) w[i] = rng.uniform(-limit, limit);
        p = {std::move(w), Tensor({spec.filters})};
        cur = {spec.filters, oh, ow};
        break;
      }
      case LayerKind::ReLU:
        break;
      case LayerKind::AvgPool2d: {
        int oh = cur.h / spec.pool;
        int ow = cur.w / spec.pool;
        if (oh <= 0 || ow <= 0) {
          throw ConfigError("architecture: avgpool window " + std::to_string(spec.pool) +
                            " larger than input at layer " + std::to_string(li));
        }
        cur = {cur.c, oh, ow};
        break;
      }
      case LayerKind::Flatten:
        cur = {cur.size(), 1, 1};
        break;
    }
    params_.push_back(std::move(p));
    out_shapes_.push_back(cur);
  }
}

int Model::class_count() const { return out_shapes_.back().size(); }

int Model::last_conv_layer() const {
  for (int li = layer_count() - 1; li >= 0; --li) {
    if (layers_[static_cast<size_t>(li)].kind == LayerKind::Conv2d) return li;
  }
  return -1;
}

bool Model::operator==(const Model& other) const {
  return architecture_id_ == other.architecture_id_ && input_shape_ == other.input_shape_ &&
         params_ == other.params_;
}

namespace {

void dense_forward(const Tensor& w, const Tensor& b, const Tensor& x, Tensor& out) {
  int units = w.shape()[0];
  int n_in = w.shape()[1];
  for (int u = 0; u < units; ++u) {
    double acc = b[u];
    const double* wrow = w.data() + static_cast<ptrdiff_t>(u) * n_in;
    const double* xv = x.data();
    for (int i = 0; i < n_in; ++i) acc += wrow[i] * xv[i];
    out[u] = acc;
  }
}

void conv_forward(const Tensor& w, const Tensor& b, const Tensor& x, Shape3 in, Shape3 out,
                  Tensor& y) {
  int k = w.shape()[2];
  for (int f = 0; f < out.c; ++f) {
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        double acc = b[f];
        for (int c = 0; c < in.c; ++c) {
          const double* xp = x.data() + (static_cast<ptrdiff_t>(c) * in.h + oy) * in.w + ox;
          const double* wp =
              w.data() + ((static_cast<ptrdiff_t>(f) * in.c + c) * k) * k;
          for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) acc += wp[ky * k + kx] * xp[ky * in.w + kx];
          }
        }
        y[(f * out.h + oy) * out.w + ox] = acc;
      }
    }
  }
}

}  // namespace

ForwardTrace forward(const Model& model, const Tensor& x) {
  Shape3 in = model.input_shape();
  if (x.size() != in.size()) {
    throw ShapeError("forward: input shape " + Tensor::shape_str(x.shape()) +
                     " does not match model input (" + std::to_string(in.c) + "," +
                     std::to_string(in.h) + "," + std::to_string(in.w) + ")");
  }
  ForwardTrace trace;
  trace.activations.reserve(model.layers().size());
  Tensor cur = x;
  Shape3 cur_shape = in;
  for (int li = 0; li < model.layer_count(); ++li) {
    const LayerSpec& spec = model.layers()[static_cast<size_t>(li)];
    Shape3 out_shape = model.layer_output_shapes()[static_cast<size_t>(li)];
    Tensor out;
    switch (spec.kind) {
      case LayerKind::Dense: {
        out = Tensor({spec.units});
        dense_forward(model.params(li)[0], model.params(li)[1], cur, out);
        break;
      }
      case LayerKind::Conv2d: {
        out = Tensor({out_shape.c, out_shape.h, out_shape.w});
        conv_forward(model.params(li)[0], model.params(li)[1], cur, cur_shape, out_shape, out);
        break;
      }
      case LayerKind::ReLU: {
        out = cur;
        for (int i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
        break;
      }
      case LayerKind::AvgPool2d: {
        int p = spec.pool;
        out = Tensor({out_shape.c, out_shape.h, out_shape.w});
        double inv = 1.0 / (p * p);
        for (int c = 0; c < out_shape.c; ++c) {
          for (int oy = 0; oy < out_shape.h; ++oy) {
            for (int ox = 0; ox < out_shape.w; ++ox) {
              double acc = 0.0;
              for (int py = 0; py < p; ++py) {
                for (int px = 0; px < p; ++px) {
                  acc += cur[(c * cur_shape.h + oy * p + py) * cur_shape.w + ox * p + px];
                }
              }
              out[(c * out_shape.h + oy) * out_shape.w + ox] = acc * inv;
            }
          }
        }
        break;
      }
      case LayerKind::Flatten: {
        out = cur.reshaped({out_shape.c});
        break;
      }
    }
    cur_shape = out_shape;
    trace.activations.push_back(out);
    cur = std::move(out);
  }
  return trace;
}

Gradients backward(const Model& model, const Tensor& x, const ForwardTrace& trace,
                   const Tensor& output_grad, bool want_param_grads) {
  int n_layers = model.layer_count();
  if (static_cast<int>(trace.activations.size()) != n_layers) {
    throw ShapeError("backward: trace layer count mismatch");
  }
  Gradients g;
  g.activation_grads.resize(static_cast<size_t>(n_layers));
  if (want_param_grads) g.param_grads.resize(static_cast<size_t>(n_layers));

  Tensor grad = output_grad;  // grad w.r.t. current layer output
  for (int li = n_layers - 1; li >= 0; --li) {
    g.activation_grads[static_cast<size_t>(li)] = grad;
    const LayerSpec& spec = model.layers()[static_cast<size_t>(li)];
    const Tensor& input = li > 0 ? trace.activations[static_cast<size_t>(li - 1)] : x;
    Shape3 in_shape = li > 0 ? model.layer_output_shapes()[static_cast<size_t>(li - 1)]
                             : model.input_shape();
    Shape3 out_shape = model.layer_output_shapes()[static_cast<size_t>(li)];
    Tensor in_grad;
    switch (spec.kind) {
      case LayerKind::Dense: {
        const Tensor& w = model.params(li)[0];
        int units = spec.units;
        int n_in = in_shape.size();
        in_grad = Tensor(input.shape());
        for (int u = 0; u < units; ++u) {
          double go = grad[u];
          if (go == 0.0) continue;
          const double* wrow = w.data() + static_cast<ptrdiff_t>(u) * n_in;
          for (int i = 0; i < n_in; ++i) in_grad[i] += go * wrow[i];
        }
        if (want_param_grads) {
          Tensor gw({units, n_in});
          Tensor gb({units});
          for (int u = 0; u < units; ++u) {
            double go = grad[u];
            gb[u] = go;
            if (go == 0.0) continue;
            double* gwrow = gw.data() + static_cast<ptrdiff_t>(u) * n_in;
            for (int i = 0; i < n_in; ++i) gwrow[i] = go * input[i];
          }
          g.param_grads[static_cast<size_t>(li)] = {std::move(gw), std::move(gb)};
        }
        break;
      }
      case LayerKind::Conv2d: {
        const Tensor& w = model.params(li)[0];
        int k = spec.kernel;
        in_grad = Tensor(input.shape());
        Tensor gw, gb;
        if (want_param_grads) {
          gw = Tensor(w.shape());
          gb = Tensor({out_shape.c});
        }
        for (int f = 0; f < out_shape.c; ++f) {
          for (int oy = 0; oy < out_shape.h; ++oy) {
            for (int ox = 0; ox < out_shape.w; ++ox) {
              double go = grad[(f * out_shape.h + oy) * out_shape.w + ox];
              if (want_param_grads) gb[f] += go;
              if (go == 0.0) continue;
              for (int c = 0; c < in_shape.c; ++c) {
                double* ig = in_grad.data() + (static_cast<ptrdiff_t>(c) * in_shape.h + oy) * in_shape.w + ox;
                const double* xp = input.data() + (static_cast<ptrdiff_t>(c) * in_shape.h + oy) * in_shape.w + ox;
                const double* wp = w.data() + ((static_cast<ptrdiff_t>(f) * in_shape.c + c) * k) * k;
                double* gwp = want_param_grads
                                  ? gw.data() + ((static_cast<ptrdiff_t>(f) * in_shape.c + c) * k) * k
                                  : nullptr;
                for (int ky = 0; ky < k; ++ky) {
                  for (int kx = 0; kx < k; ++kx) {
                    ig[ky * in_shape.w + kx] += go * wp[ky * k + kx];
                    if (gwp) gwp[ky * k + kx] += go * xp[ky * in_shape.w + kx];
                  }
                }
              }
            }
          }
        }
        if (want_param_grads) g.param_grads[static_cast<size_t>(li)] = {std::move(gw), std::move(gb)};
        break;
      }
      case LayerKind::ReLU: {
        // Subgradient at exactly 0 is 0.
        in_grad = grad;
        for (int i = 0; i < in_grad.size(); ++i) {
          if (input[i] <= 0.0) in_grad[i] = 0.0;
        }
        break;
      }
      case LayerKind::AvgPool2d: {
        int p = spec.pool;
        double inv = 1.0 / (p * p);
        in_grad = Tensor(input.shape());
        for (int c = 0; c < out_shape.c; ++c) {
          for (int oy = 0; oy < out_shape.h; ++oy) {
            for (int ox = 0; ox < out_shape.w; ++ox) {
              double go = grad[(c * out_shape.h + oy) * out_shape.w + ox] * inv;
              for (int py = 0; py < p; ++py) {
                for (int px = 0; px < p; ++px) {
                  in_grad[(c * in_shape.h + oy * p + py) * in_shape.w + ox * p + px] += go;
                }
              }
            }
          }
        }
        break;
      }
      case LayerKind::Flatten: {
        in_grad = grad.reshaped(input.shape());
        break;
      }
    }
    grad = std::move(in_grad);
  }
  g.input_grad = std::move(grad);
  return g;
}

Tensor grad_wrt_input(const Model& model, const Tensor& x, int class_index) {
  int c = model.class_count();
  if (class_index < 0 || class_index >= c) {
    throw ConfigError("grad_wrt_input: class index " + std::to_string(class_index) +
                      " out of range [0, " + std::to_string(c) + ")");
  }
  ForwardTrace trace = forward(model, x);
  Tensor out_grad(trace.logits().shape());
  out_grad[class_index] = 1.0;
  return backward(model, x, trace, out_grad).input_grad;
}

Tensor grad_wrt_activation(const Model& model, const Tensor& x, int layer_index, int class_index) {
  if (layer_index < 0 || layer_index >= model.layer_count()) {
    throw ConfigError("grad_wrt_activation: layer index " + std::to_string(layer_index) +
                      " out of range");
  }
  if (model.layers()[static_cast<size_t>(layer_index)].kind != LayerKind::Conv2d) {
    throw ConfigError("grad_wrt_activation: layer " + std::to_string(layer_index) + " is a " +
                      layer_kind_name(model.layers()[static_cast<size_t>(layer_index)].kind) +
                      " layer, not conv");
  }
  int c = model.class_count();
  if (class_index < 0 || class_index >= c) {
    throw ConfigError("grad_wrt_activation: class index " + std::to_string(class_index) +
                      " out of range [0, " + std::to_string(c) + ")");
  }
  ForwardTrace trace = forward(model, x);
  Tensor out_grad(trace.logits().shape());
  out_grad[class_index] = 1.0;
  return backward(model, x, trace, out_grad).activation_grads[static_cast<size_t>(layer_index)];
}

std::vector<double> softmax(const Tensor& logits) {
  double m = logits.max();
  std::vector<double> p(static_cast<size_t>(logits.size()));
  double z = 0.0;
  for (int i = 0; i < logits.size(); ++i) {
    p[static_cast<size_t>(i)] = std::exp(logits[i] - m);
    z += p[static_cast<size_t>(i)];
  }
  for (double& v : p) v /= z;
  return p;
}

int argmax(const Tensor& logits) {
  int best = 0;
  for (int i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

}  // namespace expeval
