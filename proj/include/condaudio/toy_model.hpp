#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "condaudio/mat.hpp"
#include "condaudio/rng.hpp"

namespace condaudio::toy {

// Desk-scale stand-in for the production stack: a small frozen backbone
// (linear + text cross-attention layers over a T' x F' latent) and the
// trainable control path (shared condition encoder, per-layer fusion blocks
// with zero-initialized output gates).
struct ToyConfig {
  std::size_t latent_len = 64;   // T'
  std::size_t latent_feat = 16;  // F'
  std::size_t hidden = 64;       // H
  std::size_t text_len = 8;
  std::size_t text_dim = 32;
  std::size_t control_len = 64;  // L'
  std::size_t n_layers = 3;
  std::vector<std::size_t> strides = {2, 4, 8};  // token group stride per layer
  std::size_t ffn_hidden = 128;
  std::size_t pitch_bins = 256;
  std::size_t energy_bins = 256;
  std::size_t label_dim = 16;  // provider embedding width E
  std::size_t timesteps = 200;
  // Linear schedule scaled for T = 200: terminal alpha_bar ~ 4e-5, so the
  // last training step is statistically indistinguishable from the pure
  // Gaussian noise the sampler starts from.
  double beta_min = 1e-4;
  double beta_max = 0.1;
  std::uint64_t seed = 7;

  void validate() const;
  std::string canonical_text() const;
  std::uint64_t digest() const;

  // Single key = value per line; unknown keys are rejected.
  std::string to_key_value() const;
  static ToyConfig from_key_value(const std::string& text);
  static ToyConfig load(const std::filesystem::path& path);
};

struct DiffusionSchedule {
  std::size_t total_steps = 0;
  std::vector<double> betas;       // index t-1 holds beta_t
  std::vector<double> alpha_bars;  // cumulative products

  static DiffusionSchedule linear(std::size_t total_steps, double beta_min, double beta_max);
  double alpha_bar(std::size_t t) const;  // t in [1, total_steps]
};

enum class ConditionType : int { timestamp = 0, pitch = 1, energy = 2 };

struct ControlEmbedding {
  Mat tokens;  // L' x H
  ConditionType type = ConditionType::timestamp;
};

struct TextEmbedding {
  Mat tokens;  // N x text_dim
};

struct ControlTokenSet {
  std::vector<Mat> groups;  // one per layer, group p has ceil(L'/stride_p) tokens
};

// Raw condition input, kept un-embedded so training can differentiate through
// the label projection and the bin-embedding tables.
struct ControlInput {
  ConditionType type = ConditionType::timestamp;
  Mat provider_emb;        // timestamp: D x E
  Mat grid;                // timestamp: D x L'
  std::vector<int> bins;   // pitch/energy: length L'
};

struct Conditioning {
  TextEmbedding text;
  std::optional<ControlInput> control;
  bool null_condition = false;  // replaces text and control by learned null tokens
};

// Ordered named parameter tensors.
class ParamSet {
 public:
  Mat& add(const std::string& name, Mat value);
  Mat& at(const std::string& name);
  const Mat& at(const std::string& name) const;
  bool has(const std::string& name) const;

  std::vector<std::pair<std::string, Mat>>& items() { return items_; }
  const std::vector<std::pair<std::string, Mat>>& items() const { return items_; }
  std::size_t scalar_count() const;
  ParamSet zeros_like() const;
  bool same_values(const ParamSet& other) const;  // bytewise comparison

 private:
  std::vector<std::pair<std::string, Mat>> items_;
};

struct ToyModel {
  ToyConfig config;
  ParamSet frozen;
  ParamSet trainable;

  static ToyModel init(const ToyConfig& config);
};

// --- forward operations -----------------------------------------------------

// tokens = MLP(standardized + position_embedding) + CLS[type]; the MLP is
// shared across all condition types.
ControlEmbedding encode_control(const Mat& standardized, ConditionType type,
                                const ToyModel& model);

// x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise
Mat forward_diffuse(const Mat& x0, std::size_t t, const Mat& noise,
                    const DiffusionSchedule& schedule);

ControlTokenSet downsample_control(const ControlEmbedding& embedding, const ToyModel& model);

// out = mel + gate * FFN(mel-token rows of SelfAttn([control ; mel]))
Mat fusion_forward(const Mat& mel_tokens, const Mat& control_tokens, const ToyModel& model,
                   std::size_t layer);

Mat predict_noise(const Mat& x_t, std::size_t t, const TextEmbedding& text,
                  const ControlEmbedding* control, const ToyModel& model);

double ldm_loss(const ToyModel& model, const Mat& x0, std::size_t t, const Mat& noise,
                const Conditioning& cond);

// eps_hat = omega * eps_cond + (1 - omega) * eps_uncond
Mat cfg_combine(const Mat& eps_cond, const Mat& eps_uncond, double omega);

// Standardized L' x H view of a raw control input using the model's trainable
// embedding tables (read-only here).
Mat standardized_for(const ControlInput& input, const ToyModel& model);

Mat sinusoidal_time_embedding(std::size_t t, std::size_t dim);

// Deterministic pseudo text encoder (hash-derived token vectors); stands in
// for the frozen language model.
TextEmbedding pseudo_text_embedding(const std::string& caption, const ToyConfig& config);

}  // namespace condaudio::toy
