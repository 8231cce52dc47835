#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "expeval/tensor.hpp"

namespace expeval {

enum class LayerKind { Dense, Conv2d, ReLU, AvgPool2d, Flatten };

struct LayerSpec {
  LayerKind kind;
  int units = 0;    // dense
  int filters = 0;  // conv
  int kernel = 0;   // conv (square, stride 1, valid padding)
  int pool = 0;     // avgpool (square window == stride)
};

/// Parses an architecture id such as
/// "conv:8:3|relu|avgpool:2|conv:16:3|relu|avgpool:2|flatten|dense:4".
std::vector<LayerSpec> parse_architecture(const std::string& architecture_id);
std::string layer_kind_name(LayerKind kind);

struct Shape3 {
  int c = 0, h = 0, w = 0;
  int size() const { return c * h * w; }
  bool operator==(const Shape3&) const = default;
};

/// A sequential network. Parameters are initialized with seeded Glorot
/// uniform weights and zero biases; two models built from the same
/// (architecture_id, seed, input shape) are bit-identical.
class Model {
 public:
  Model() = default;
  Model(std::string architecture_id, Shape3 input_shape, uint64_t seed);

  const std::string& architecture_id() const { return architecture_id_; }
  Shape3 input_shape() const { return input_shape_; }
  uint64_t seed() const { return seed_; }
  int class_count() const;

  const std::vector<LayerSpec>& layers() const { return layers_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  /// Parameter tensors of one layer: {weights, bias} for dense/conv,
  /// empty for the rest.
  std::vector<Tensor>& params(int layer) { return params_[static_cast<size_t>(layer)]; }
  const std::vector<Tensor>& params(int layer) const { return params_[static_cast<size_t>(layer)]; }
  std::vector<std::vector<Tensor>>& all_params() { return params_; }
  const std::vector<std::vector<Tensor>>& all_params() const { return params_; }

  /// Output shape of each layer, in order. Shapes after flatten/dense are
  /// reported as (units, 1, 1).
  const std::vector<Shape3>& layer_output_shapes() const { return out_shapes_; }

  /// Index of the last conv layer, or -1 if the model has none.
  int last_conv_layer() const;

  bool operator==(const Model& other) const;

  /// Free-form label used for provenance in explanation maps ("fold2", ...).
  std::string model_id;

 private:
  std::string architecture_id_;
  Shape3 input_shape_;
  uint64_t seed_ = 0;
  std::vector<LayerSpec> layers_;
  std::vector<std::vector<Tensor>> params_;
  std::vector<Shape3> out_shapes_;
};

struct ForwardTrace {
  std::vector<Tensor> activations;  // one per layer, in order
  const Tensor& logits() const { return activations.back(); }
};

/// Per-layer gradients of one logit with respect to activations and
/// (optionally) parameters.
struct Gradients {
  Tensor input_grad;
  std::vector<Tensor> activation_grads;          // d logit / d (layer output)
  std::vector<std::vector<Tensor>> param_grads;  // aligned with Model::params
};

ForwardTrace forward(const Model& model, const Tensor& x);

/// Backpropagates `output_grad` (same shape as the logits) through the model.
Gradients backward(const Model& model, const Tensor& x, const ForwardTrace& trace,
                   const Tensor& output_grad, bool want_param_grads = false);

/// d(logit[class_index]) / dx, same shape as x.
Tensor grad_wrt_input(const Model& model, const Tensor& x, int class_index);

/// d(logit[class_index]) / d(activation of conv layer `layer_index`).
Tensor grad_wrt_activation(const Model& model, const Tensor& x, int layer_index, int class_index);

std::vector<double> softmax(const Tensor& logits);
int argmax(const Tensor& logits);

}  // namespace expeval
