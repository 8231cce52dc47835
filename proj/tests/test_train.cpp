#include <doctest.h>

#include "expeval/dataset.hpp"
#include "expeval/errors.hpp"
#include "expeval/train.hpp"

using namespace expeval;

TEST_CASE("training lowers the loss and lifts accuracy on a small task") {
  LabeledDataset data = gen_shapes(200, 12, 2, 1);
  Model init("conv:4:3|relu|avgpool:2|flatten|dense:2", {1, 12, 12}, 1);
  double loss_before = cross_entropy_loss(init, data);

  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.seed = 1;
  TrainStats stats;
  Model trained = train(init, data, cfg, &stats);

  CHECK(cross_entropy_loss(trained, data) < loss_before);
  CHECK(stats.train_accuracy > 0.8);
  CHECK(accuracy(trained, data) == doctest::Approx(stats.train_accuracy).epsilon(1e-12));
}

TEST_CASE("a linear probe reaches 80% test accuracy on the synthetic task") {
  // Calibration guard for gen_shapes: the task must stay learnable by a
  // linear readout (the glyphs have well separated pixel masses) while the
  // occluded fraction keeps it from being trivially separable.
  LabeledDataset data = gen_shapes(2000, 16, 4, 7);
  TrainTestSplit split = split_train_test(data, 0.2, 7);
  Model init("flatten|dense:4", {1, 16, 16}, 7);
  TrainConfig cfg;
  cfg.epochs = 80;
  cfg.learning_rate = 0.1;
  cfg.seed = 7;
  Model probe = train(init, split.train, cfg);
  CHECK(accuracy(probe, split.test) >= 0.8);
}

TEST_CASE("training is deterministic given the config") {
  LabeledDataset data = gen_shapes(80, 10, 2, 4);
  Model init("flatten|dense:2", {1, 10, 10}, 4);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 9;
  Model a = train(init, data, cfg);
  Model b = train(init, data, cfg);
  CHECK(a == b);

  cfg.seed = 10;
  Model c = train(init, data, cfg);
  CHECK(!(a == c));
}

TEST_CASE("diverging training reports a numeric error") {
  LabeledDataset data = gen_shapes(60, 10, 2, 2);
  // A linear model's logits grow only linearly with the weights and never
  // overflow; stacking two trainable layers makes the blow-up multiplicative.
  Model init("conv:4:3|relu|flatten|dense:2", {1, 10, 10}, 2);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.learning_rate = 1e155;  // guaranteed overflow once both layers explode
  cfg.seed = 2;
  cfg.batch_size = 16;
  CHECK_THROWS_AS(train(init, data, cfg), DivergenceError);
}

TEST_CASE("training does not mutate its input model") {
  LabeledDataset data = gen_shapes(60, 10, 2, 3);
  Model init("flatten|dense:2", {1, 10, 10}, 3);
  Model copy = init;
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 3;
  train(init, data, cfg);
  CHECK(init == copy);
}
