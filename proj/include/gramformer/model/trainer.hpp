// SPDX-FileCopyrightText: Copyright (c) 2026 The Gramformer Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gramformer/model/loss.hpp"
#include "gramformer/model/model.hpp"
#include "gramformer/numerics/adam.hpp"
#include "gramformer/numerics/gradcheck.hpp"

namespace gramformer::model {

/// An image with its density target at the model's output resolution.
struct TrainingExample {
  Tensor image;    // 1×H×W
  Tensor density;  // 1×(H/stride)×(W/stride)
  double count = 0.0;
};

/// Sums non-overlapping factor×factor blocks of an H×W or 1×H×W map. Mass is
/// preserved exactly.
Tensor sum_pool(const Tensor& map, std::size_t factor);

/// Pools a full-resolution density down to the model's output stride.
TrainingExample make_example(Tensor image, const Tensor& full_density, std::size_t stride, double count);

/// Mirror image and density left-to-right.
TrainingExample flip_horizontal(const TrainingExample& ex);

struct TrainOptions {
  AdamConfig adam;
  /// The learning rate ramps linearly from lr/warmup to lr over this many
  /// steps. Without it the first Adam steps move every weight by ~lr at once
  /// and the output ReLU can overshoot into a dead state.
  std::size_t warmup = 100;
  /// When nonzero, the rate follows a half cosine from lr down to 0 at this
  /// step after warmup. 0 keeps it constant.
  std::size_t decay_steps = 0;
  bool flip = true;
  std::string loss = "mse_count";
  std::uint64_t seed = 0;
};

struct StepStats {
  double loss = 0.0;
  double data_loss = 0.0;
  double regularization = 0.0;
};

/// Single-threaded training loop state: optimizer moments and the
/// augmentation stream. Deterministic given the seed and the example order.
class Trainer {
 public:
  Trainer(GramformerModel& model, TrainOptions options);

  /// forward → total loss → backward → Adam update.
  StepStats step(const TrainingExample& example);

  const AdamState& optimizer() const noexcept { return state_; }
  /// Learning rate used by the next step.
  double learning_rate() const noexcept;
  const DensityLoss& loss() const noexcept { return *loss_; }

 private:
  GramformerModel& model_;
  TrainOptions options_;
  std::unique_ptr<DensityLoss> loss_;
  AdamState state_;
  std::mt19937_64 rng_;
  std::size_t steps_ = 0;
};

/// Epoch-wise shuffled visiting order over n examples.
class SampleOrder {
 public:
  SampleOrder(std::size_t n, std::uint64_t seed);
  std::size_t next();

 private:
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::mt19937_64 rng_;
};

/// Σ of the predicted density for one image.
double predict_count(GramformerModel& model, const Tensor& image);

/// Total training loss on one example as a grad_check target. Neighbour sets
/// are frozen at the ones the unperturbed model selects. `prepare` runs on
/// the tape of every analytic backward pass (used to inject faults).
GradCheckTarget make_gradcheck_target(GramformerModel& model, const TrainingExample& example,
                                      const std::string& loss = "mse_count",
                                      std::function<void(Tape&)> prepare = {});

}  // namespace gramformer::model
