#pragma once

#include <vector>

#include "condaudio/rng.hpp"
#include "condaudio/toy_model.hpp"

namespace condaudio::toy {

struct TrainSample {
  Mat x0;
  std::size_t t = 1;
  Mat noise;
  Conditioning cond;
};

// Gradient descent with momentum over the trainable set; frozen parameters
// are never touched.
struct Trainer {
  double momentum = 0.9;
  ParamSet velocity;

  explicit Trainer(const ToyModel& model) : velocity(model.trainable.zeros_like()) {}
};

// Each sample independently switches to the learned null condition with
// probability p.
void guidance_dropout(std::vector<TrainSample>& batch, double p, Rng& rng);

// One optimizer step on the mean batch loss; returns the pre-update loss.
// Throws DivergenceError when the loss is not finite.
double train_step(ToyModel& model, Trainer& trainer, const std::vector<TrainSample>& batch,
                  double learning_rate);

// Batch-mean loss and gradients without updating anything; the analytic side
// of the finite-difference checks.
double batch_loss_and_grads(const ToyModel& model, const std::vector<TrainSample>& batch,
                            ParamSet& grads);
double batch_loss(const ToyModel& model, const std::vector<TrainSample>& batch);

// DDIM-style reverse trajectory from seeded Gaussian noise; both branches of
// the classifier-free blend are evaluated each step. Deterministic per seed.
Mat sample(const ToyModel& model, const TextEmbedding& text, const ControlEmbedding* control,
           std::size_t steps, double omega, Rng& rng);

}  // namespace condaudio::toy
