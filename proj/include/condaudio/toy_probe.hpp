#pragma once

#include <cstdint>
#include <vector>

#include "condaudio/toy_model.hpp"

namespace condaudio::toy {

// Synthetic controllability probe: each sample's latent carries a per-step
// profile (event activity, pitch shape, or energy envelope) deterministically
// derived from its control condition, projected onto a type-specific feature
// direction. Condition-following is then measurable as the correlation
// between a generated latent's profile and the conditioning profile.
struct ProbeSample {
  Mat x0;                      // latent_len x latent_feat
  Conditioning cond;
  std::vector<double> target;  // length latent_len
  ConditionType type = ConditionType::timestamp;
};

// Orthonormal per-type feature direction (1 x latent_feat), keyed to the
// config seed so training and evaluation agree.
Mat probe_basis(const ToyConfig& config, ConditionType type);

// Deterministic sample `index` from the named stream ("probe/train",
// "probe/eval", ...). Condition type rotates with the index.
ProbeSample make_probe_sample(const ToyConfig& config, const char* stream,
                              std::uint64_t index);

// Pearson correlation between the latent's per-step projection onto the
// sample's basis and the sample's target profile (0 when degenerate).
double probe_correlation(const Mat& latent, const ProbeSample& sample,
                         const ToyConfig& config);

struct ProbeEval {
  double matched = 0.0;   // mean correlation, conditions paired with targets
  double shuffled = 0.0;  // mean correlation, conditions rotated one sample
  double gap() const { return matched - shuffled; }
};

ProbeEval evaluate_control_following(const ToyModel& model, std::uint64_t sampler_seed,
                                     std::size_t n_eval, double omega, std::size_t steps);

}  // namespace condaudio::toy
