#include "condaudio/toy_train.hpp"

#include <cmath>
#include <string>

#include "condaudio/errors.hpp"
#include "toy_forward.hpp"

namespace condaudio::toy {
namespace {

// Mean loss over the batch on one tape so a single backward pass covers it.
double run_batch(const ToyModel& model, const std::vector<TrainSample>& batch,
                 ParamSet* grads) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const auto schedule = DiffusionSchedule::linear(
      model.config.timesteps, model.config.beta_min, model.config.beta_max);

  detail::ForwardCtx ctx(model, grads);
  Graph::NodeId total = -1;
  for (const auto& s : batch) {
    const Mat x_t = forward_diffuse(s.x0, s.t, s.noise, schedule);
    auto text = ctx.text_node(s.cond);
    auto groups = ctx.control_groups(s.cond);
    const bool has_control = s.cond.null_condition || s.cond.control.has_value();
    auto pred = ctx.predict_noise_node(x_t, s.t, text, has_control ? &groups : nullptr);
    auto loss = ctx.g.mean_sq_diff(pred, ctx.g.input(s.noise));
    total = total < 0 ? loss : ctx.g.add(total, loss);
  }
  total = ctx.g.scale(total, 1.0 / double(batch.size()));
  const double value = ctx.g.value(total)(0, 0);
  if (grads && std::isfinite(value)) ctx.g.backward(total);
  return value;
}

}  // namespace

void guidance_dropout(std::vector<TrainSample>& batch, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("dropout probability out of range");
  for (auto& s : batch)
    if (rng.uniform() < p) s.cond.null_condition = true;
}

double batch_loss_and_grads(const ToyModel& model, const std::vector<TrainSample>& batch,
                            ParamSet& grads) {
  return run_batch(model, batch, &grads);
}

double batch_loss(const ToyModel& model, const std::vector<TrainSample>& batch) {
  return run_batch(model, batch, nullptr);
}

double train_step(ToyModel& model, Trainer& trainer, const std::vector<TrainSample>& batch,
                  double learning_rate) {
  ParamSet grads = model.trainable.zeros_like();
  const double loss = run_batch(model, batch, &grads);
  if (!std::isfinite(loss)) {
    std::string diag = "divergence: non-finite loss over batch of " +
                       std::to_string(batch.size()) + " (t values:";
    for (const auto& s : batch) diag += " " + std::to_string(s.t);
    throw DivergenceError(diag + ")");
  }

  for (std::size_t i = 0; i < grads.items().size(); ++i) {
    Mat& g = grads.items()[i].second;
    Mat& v = trainer.velocity.items()[i].second;
    Mat& p = model.trainable.items()[i].second;
    for (std::size_t k = 0; k < g.size(); ++k) {
      v.raw()[k] = trainer.momentum * v.raw()[k] + g.raw()[k];
      p.raw()[k] -= learning_rate * v.raw()[k];
    }
  }
  return loss;
}

Mat sample(const ToyModel& model, const TextEmbedding& text, const ControlEmbedding* control,
           std::size_t steps, double omega, Rng& rng) {
  if (steps == 0) throw std::invalid_argument("sample: steps must be >= 1");
  if (omega < 0.0) throw std::invalid_argument("sample: omega must be >= 0");
  const ToyConfig& c = model.config;
  const auto schedule = DiffusionSchedule::linear(c.timesteps, c.beta_min, c.beta_max);

  // Evenly spaced descending timestep subsequence over [1, T].
  std::vector<std::size_t> ts;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto t = std::size_t(
        std::llround(double(c.timesteps) * double(steps - k) / double(steps)));
    const auto clamped = std::max<std::size_t>(1, std::min(t, c.timesteps));
    if (ts.empty() || clamped < ts.back()) ts.push_back(clamped);
  }

  Mat x(c.latent_len, c.latent_feat);
  for (double& v : x.raw()) v = rng.normal();

  Conditioning null_cond;
  null_cond.null_condition = true;

  for (std::size_t k = 0; k < ts.size(); ++k) {
    const std::size_t t = ts[k];
    const double ab_t = schedule.alpha_bar(t);
    const double ab_prev = (k + 1 < ts.size()) ? schedule.alpha_bar(ts[k + 1]) : 1.0;

    detail::ForwardCtx c_cond(model, nullptr);
    Conditioning cond_wrap;
    cond_wrap.text = text;
    auto text_id = c_cond.text_node(cond_wrap);
    std::vector<Graph::NodeId> groups;
    if (control) groups = c_cond.control_groups_from_tokens(c_cond.g.input(control->tokens));
    auto eps_cond_id =
        c_cond.predict_noise_node(x, t, text_id, control ? &groups : nullptr);
    const Mat eps_cond = c_cond.g.value(eps_cond_id);

    detail::ForwardCtx c_unc(model, nullptr);
    auto null_text = c_unc.text_node(null_cond);
    auto null_groups = c_unc.control_groups(null_cond);
    auto eps_unc_id = c_unc.predict_noise_node(x, t, null_text, &null_groups);
    const Mat eps_uncond = c_unc.g.value(eps_unc_id);

    const Mat eps = cfg_combine(eps_cond, eps_uncond, omega);

    const double sa = std::sqrt(ab_t);
    const double sb = std::sqrt(1.0 - ab_t);
    const double pa = std::sqrt(ab_prev);
    const double pb = std::sqrt(1.0 - ab_prev);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double x0_pred = (x.raw()[i] - sb * eps.raw()[i]) / sa;
      x.raw()[i] = pa * x0_pred + pb * eps.raw()[i];
    }
    if (!all_finite(x)) throw DivergenceError("sampler divergence at step t=" + std::to_string(t));
  }
  return x;
}

}  // namespace condaudio::toy
