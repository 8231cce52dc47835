#include "expeval/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "expeval/errors.hpp"
#include "expeval/rng.hpp"

namespace expeval {

namespace {

double sample_loss_and_logit_grad(const Tensor& logits, int label, Tensor& logit_grad) {
  std::vector<double> p = softmax(logits);
  for (int i = 0; i < logits.size(); ++i) logit_grad[i] = p[static_cast<size_t>(i)];
  logit_grad[label] -= 1.0;
  double pl = p[static_cast<size_t>(label)];
  return -std::log(std::max(pl, 1e-300));
}

}  // namespace

double cross_entropy_loss(const Model& model, const LabeledDataset& data) {
  if (data.size() == 0) throw ConfigError("cross_entropy_loss: empty dataset");
  double total = 0.0;
  Tensor dummy({model.class_count()});
  for (int i = 0; i < data.size(); ++i) {
    total += sample_loss_and_logit_grad(forward(model, data.sample(i)).logits(),
                                        data.labels[static_cast<size_t>(i)], dummy);
  }
  return total / data.size();
}

Model train(const Model& model, const LabeledDataset& data, const TrainConfig& cfg,
            TrainStats* stats) {
  if (data.size() == 0) throw ConfigError("train: empty dataset");
  if (cfg.batch_size <= 0 || cfg.batch_size > data.size()) {
    throw ConfigError("train: batch_size " + std::to_string(cfg.batch_size) +
                      " invalid for dataset of size " + std::to_string(data.size()));
  }
  if (cfg.learning_rate < 0.0) throw ConfigError("train: learning_rate must be >= 0");
  if (cfg.epochs < 0) throw ConfigError("train: epochs must be >= 0");
  int c = model.class_count();
  for (int i = 0; i < data.size(); ++i) {
    int y = data.labels[static_cast<size_t>(i)];
    if (y < 0 || y >= c) {
      throw ConfigError("train: label " + std::to_string(y) + " of sample " + std::to_string(i) +
                        " outside [0, " + std::to_string(c) + ")");
    }
  }

  Model m = model;
  // Momentum buffers aligned with the parameter tensors.
  std::vector<std::vector<Tensor>> velocity;
  velocity.reserve(static_cast<size_t>(m.layer_count()));
  for (int li = 0; li < m.layer_count(); ++li) {
    std::vector<Tensor> v;
    for (const Tensor& p : m.params(li)) v.emplace_back(p.shape());
    velocity.push_back(std::move(v));
  }

  Rng shuffle_rng(Rng::derive(cfg.seed, 0x7261696eULL));
  std::vector<int> order(static_cast<size_t>(data.size()));
  std::iota(order.begin(), order.end(), 0);

  Tensor logit_grad({c});
  double last_epoch_loss = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int start = 0; start < data.size(); start += cfg.batch_size) {
      int end = std::min(start + cfg.batch_size, data.size());
      int bs = end - start;

      std::vector<std::vector<Tensor>> batch_grads;
      batch_grads.reserve(static_cast<size_t>(m.layer_count()));
      for (int li = 0; li < m.layer_count(); ++li) {
        std::vector<Tensor> g;
        for (const Tensor& p : m.params(li)) g.emplace_back(p.shape());
        batch_grads.push_back(std::move(g));
      }

      double batch_loss = 0.0;
      for (int bi = start; bi < end; ++bi) {
        int idx = order[static_cast<size_t>(bi)];
        Tensor x = data.sample(idx);
        ForwardTrace trace = forward(m, x);
        batch_loss += sample_loss_and_logit_grad(trace.logits(),
                                                 data.labels[static_cast<size_t>(idx)], logit_grad);
        Gradients g = backward(m, x, trace, logit_grad, /*want_param_grads=*/true);
        for (int li = 0; li < m.layer_count(); ++li) {
          auto& acc = batch_grads[static_cast<size_t>(li)];
          auto& pg = g.param_grads[static_cast<size_t>(li)];
          for (size_t pi = 0; pi < acc.size(); ++pi) {
            for (int j = 0; j < acc[pi].size(); ++j) acc[pi][j] += pg[pi][j];
          }
        }
      }
      batch_loss /= bs;
      epoch_loss += batch_loss * bs;
      if (!std::isfinite(batch_loss)) {
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch) +
                              ", batch starting " + std::to_string(start) + " (lr=" +
                              std::to_string(cfg.learning_rate) + ", seed=" +
                              std::to_string(cfg.seed) + ")");
      }

      double scale = 1.0 / bs;
      for (int li = 0; li < m.layer_count(); ++li) {
        auto& params = m.params(li);
        auto& vel = velocity[static_cast<size_t>(li)];
        auto& grads = batch_grads[static_cast<size_t>(li)];
        for (size_t pi = 0; pi < params.size(); ++pi) {
          for (int j = 0; j < params[pi].size(); ++j) {
            double g = grads[pi][j] * scale;
            vel[pi][j] = cfg.momentum * vel[pi][j] + g;
            params[pi][j] -= cfg.learning_rate * vel[pi][j];
          }
        }
      }
    }
    last_epoch_loss = epoch_loss / data.size();
  }

  if (stats) {
    stats->final_loss = cfg.epochs > 0 ? last_epoch_loss : cross_entropy_loss(m, data);
    stats->train_accuracy = accuracy(m, data);
  }
  return m;
}

}  // namespace expeval
