// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#include "gramformer/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gramformer/numerics/errors.hpp"

namespace gramformer::model {

Tensor sum_pool(const Tensor& map, std::size_t factor) {
  const bool planar = map.rank() == 3;
  if (!(map.rank() == 2 || (planar && map.dim(0) == 1))) {
    throw ShapeError("sum_pool: expected H×W or 1×H×W, got " + shape_string(map.dims()));
  }
  const std::size_t h = map.dim(planar ? 1 : 0);
  const std::size_t w = map.dim(planar ? 2 : 1);
  if (factor == 0 || h % factor != 0 || w % factor != 0) {
    throw ContractError("sum_pool: " + shape_string(map.dims()) + " not divisible by " + std::to_string(factor));
  }
  const std::size_t oh = h / factor;
  const std::size_t ow = w / factor;
  Tensor out({1, oh, ow});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) out[(y / factor) * ow + x / factor] += map[y * w + x];
  return out;
}

TrainingExample make_example(Tensor image, const Tensor& full_density, std::size_t stride, double count) {
  TrainingExample ex;
  if (image.rank() == 2) image = image.reshaped({1, image.dim(0), image.dim(1)});
  ex.image = std::move(image);
  ex.density = sum_pool(full_density, stride);
  ex.count = count;
  return ex;
}

namespace {

Tensor mirror(const Tensor& t) {
  Tensor out(t.dims());
  const std::size_t w = t.dims().back();
  const std::size_t rows = t.size() / w;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t x = 0; x < w; ++x) out[r * w + x] = t[r * w + (w - 1 - x)];
  return out;
}

}  // namespace

TrainingExample flip_horizontal(const TrainingExample& ex) {
  return {mirror(ex.image), mirror(ex.density), ex.count};
}

Trainer::Trainer(GramformerModel& model, TrainOptions options)
    : model_(model), options_(std::move(options)), loss_(make_density_loss(options_.loss)), rng_(options_.seed) {}

StepStats Trainer::step(const TrainingExample& example) {
  // One draw per step whether or not flipping is enabled keeps the stream
  // aligned across configurations.
  const bool flip = (rng_() & 1u) != 0 && options_.flip;
  TrainingExample flipped;
  if (flip) flipped = flip_horizontal(example);
  const TrainingExample& input = flip ? flipped : example;

  Tape tape;
  ForwardOptions fo;
  fo.keep_trace = false;
  ForwardResult fwd = model_.forward(tape, input.image, fo);
  Var data_loss = (*loss_)(fwd.density, input.density);
  Var loss = total_loss(data_loss, fwd.regularization, model_.config().lambda);

  model_.params().zero_grad();
  tape.backward(loss);
  auto tensors = model_.params().tensors();
  AdamConfig adam = options_.adam;
  adam.lr = learning_rate();
  adam_step(tensors, state_, adam);
  ++steps_;

  StepStats stats;
  stats.loss = loss.value()[0];
  stats.data_loss = data_loss.value()[0];
  stats.regularization = fwd.regularization ? fwd.regularization->value()[0] : 0.0;
  return stats;
}

double Trainer::learning_rate() const noexcept {
  double lr = options_.adam.lr;
  if (steps_ < options_.warmup) lr *= static_cast<double>(steps_ + 1) / static_cast<double>(options_.warmup);
  if (options_.decay_steps > 0) {
    const double t = std::min(1.0, static_cast<double>(steps_) / static_cast<double>(options_.decay_steps));
    lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * t));
  }
  return lr;
}

SampleOrder::SampleOrder(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) {
  if (n == 0) throw ContractError("SampleOrder: empty dataset");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  pos_ = n;  // shuffle on first draw
}

std::size_t SampleOrder::next() {
  if (pos_ == order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  return order_[pos_++];
}

double predict_count(GramformerModel& model, const Tensor& image) {
  Tape tape;
  ForwardOptions fo;
  fo.keep_trace = false;
  const ForwardResult r = model.forward(tape, image, fo);
  double total = 0.0;
  for (double v : r.density.value().values()) total += v;
  return total;
}

GradCheckTarget make_gradcheck_target(GramformerModel& model, const TrainingExample& example, const std::string& loss,
                                      std::function<void(Tape&)> prepare) {
  struct State {
    GramformerModel* model;
    TrainingExample example;
    std::unique_ptr<DensityLoss> loss;
    std::vector<graphs::NeighborSets> neighbors;
    std::function<void(Tape&)> prepare;

    Var forward(Tape& tape) {
      ForwardOptions fo;
      fo.keep_trace = false;
      fo.frozen_neighbors = neighbors.empty() ? nullptr : &neighbors;
      ForwardResult r = model->forward(tape, example.image, fo);
      if (neighbors.empty()) neighbors = r.neighbors;
      return total_loss((*loss)(r.density, example.density), r.regularization, model->config().lambda);
    }
  };
  auto state = std::make_shared<State>(State{&model, example, make_density_loss(loss), {}, std::move(prepare)});
  {
    Tape tape;
    state->forward(tape);  // fixes the neighbour sets
  }

  GradCheckTarget target;
  target.evaluate = [state] {
    Tape tape;
    return state->forward(tape).value()[0];
  };
  target.compute_gradients = [state] {
    state->model->params().zero_grad();
    Tape tape;
    if (state->prepare) state->prepare(tape);
    tape.backward(state->forward(tape));
  };
  target.params = model.params().named();
  return target;
}

}  // namespace gramformer::model
