#include "condaudio/toy_probe.hpp"

#include <cmath>
#include <numbers>

#include "condaudio/conditions.hpp"
#include "condaudio/toy_train.hpp"

namespace condaudio::toy {
namespace {

constexpr double kTau = 2.0 * std::numbers::pi;
const char* kProbeCaption = "synthetic probe clip";
const char* kProbeClasses[3] = {"alarm", "dog", "water"};

std::vector<double> znorm(std::vector<double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= double(v.size());
  const double inv = var > 1e-12 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& x : v) x = (x - mean) * inv;
  return v;
}

Mat orthonormal_rows(Rng rng, std::size_t rows, std::size_t cols) {
  Mat m(rows, cols);
  for (double& v : m.raw()) v = rng.normal();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t p = 0; p < r; ++p) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += m(r, c) * m(p, c);
      for (std::size_t c = 0; c < cols; ++c) m(r, c) -= dot * m(p, c);
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < cols; ++c) norm += m(r, c) * m(r, c);
    norm = std::sqrt(norm);
    for (std::size_t c = 0; c < cols; ++c) m(r, c) /= norm;
  }
  return m;
}

dsp::Contour to_contour(const std::vector<double>& values) {
  dsp::Contour c;
  c.frame_rate = 100.0;
  c.values.reserve(values.size());
  for (double v : values) c.values.push_back(float(v));
  c.voiced.assign(values.size(), 1);
  return c;
}

}  // namespace

Mat probe_basis(const ToyConfig& config, ConditionType type) {
  if (config.latent_feat < 3)
    throw std::invalid_argument("probe needs latent_feat >= 3 for distinct bases");
  const Mat all = orthonormal_rows(Rng(config.seed).stream("probe/basis"), 3,
                                   config.latent_feat);
  Mat row(1, config.latent_feat);
  for (std::size_t c = 0; c < config.latent_feat; ++c) row(0, c) = all(std::size_t(type), c);
  return row;
}

ProbeSample make_probe_sample(const ToyConfig& config, const char* stream,
                              std::uint64_t index) {
  const std::size_t L = config.control_len;
  const std::size_t T = config.latent_len;
  Rng rng = Rng(config.seed).stream(stream, index);

  ProbeSample out;
  out.type = ConditionType(int(index % 3));
  out.cond.text = pseudo_text_embedding(kProbeCaption, config);
  out.cond.control = ControlInput{};
  out.cond.control->type = out.type;

  // per-control-frame profile
  std::vector<double> profile(L, 0.0);
  switch (out.type) {
    case ConditionType::timestamp: {
      const std::size_t n_seg = 1 + rng.below(3);
      for (std::size_t s = 0; s < n_seg; ++s) {
        const auto len = std::size_t(double(L) * rng.uniform_in(0.1, 0.35));
        const auto start = std::size_t(rng.uniform() * double(L - std::min(len, L - 1)));
        for (std::size_t l = start; l < std::min(start + std::max<std::size_t>(len, 1), L); ++l)
          profile[l] = 1.0;
      }
      bool all_on = true;
      for (double v : profile) all_on = all_on && v == 1.0;
      if (all_on)  // keep some contrast in the activity pattern
        for (std::size_t l = 3 * L / 4; l < L; ++l) profile[l] = 0.0;

      const std::size_t chosen = rng.below(3);
      conditions::PseudoEmbeddingProvider provider(config.label_dim);
      Mat prov(3, config.label_dim);
      for (std::size_t d = 0; d < 3; ++d) {
        const auto v = provider.embed(kProbeClasses[d]);
        for (std::size_t e = 0; e < config.label_dim; ++e) prov(d, e) = v[e];
      }
      Mat grid(3, L);
      for (std::size_t l = 0; l < L; ++l) grid(chosen, l) = profile[l];
      out.cond.control->provider_emb = std::move(prov);
      out.cond.control->grid = std::move(grid);
      break;
    }
    case ConditionType::pitch: {
      const double depth = rng.uniform_in(0.5, 1.0);
      const double cycles = rng.uniform_in(1.0, 3.0);
      const double phase = rng.uniform();
      std::vector<double> hz(L);
      for (std::size_t l = 0; l < L; ++l)
        hz[l] = 220.0 *
                std::pow(2.0, depth * std::sin(kTau * (cycles * double(l) / double(L) + phase)));
      const auto q = dsp::log_quantize(to_contour(hz), int(config.pitch_bins), 40.0f, 1600.0f);
      out.cond.control->bins = q.indices;
      for (std::size_t l = 0; l < L; ++l) profile[l] = std::log(hz[l]);
      profile = znorm(std::move(profile));
      break;
    }
    case ConditionType::energy: {
      const double cycles = rng.uniform_in(0.5, 2.5);
      const double phase = rng.uniform();
      std::vector<double> env(L);
      for (std::size_t l = 0; l < L; ++l) {
        const double s = 0.5 + 0.5 * std::sin(kTau * (cycles * double(l) / double(L) + phase));
        env[l] = 0.05 + 0.95 * s * s;
      }
      const auto q =
          dsp::log_quantize(to_contour(env), int(config.energy_bins), 1e-3f, 1.0f);
      out.cond.control->bins = q.indices;
      profile = env;
      profile = znorm(std::move(profile));
      break;
    }
  }

  // latent-step target derived from the control-frame profile
  out.target.resize(T);
  for (std::size_t t = 0; t < T; ++t) out.target[t] = profile[t * L / T];

  double msq = 0.0;
  for (double v : out.target) msq += v * v;
  msq /= double(T);
  const double scale = std::sqrt(double(config.latent_feat) / std::max(msq, 0.05));

  const Mat basis = probe_basis(config, out.type);
  out.x0 = Mat(T, config.latent_feat);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < config.latent_feat; ++f)
      out.x0(t, f) = scale * out.target[t] * basis(0, f);
  return out;
}

double probe_correlation(const Mat& latent, const ProbeSample& sample,
                         const ToyConfig& config) {
  const Mat basis = probe_basis(config, sample.type);
  const std::size_t T = latent.rows();
  if (T != sample.target.size()) throw std::invalid_argument("latent length mismatch");
  std::vector<double> v(T, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t f = 0; f < latent.cols(); ++f) v[t] += latent(t, f) * basis(0, f);

  double mv = 0.0, mt = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    mv += v[t];
    mt += sample.target[t];
  }
  mv /= double(T);
  mt /= double(T);
  double num = 0.0, dv = 0.0, dt = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double a = v[t] - mv;
    const double b = sample.target[t] - mt;
    num += a * b;
    dv += a * a;
    dt += b * b;
  }
  if (dv <= 1e-12 || dt <= 1e-12) return 0.0;
  return num / std::sqrt(dv * dt);
}

ProbeEval evaluate_control_following(const ToyModel& model, std::uint64_t sampler_seed,
                                     std::size_t n_eval, double omega, std::size_t steps) {
  if (n_eval < 2) throw std::invalid_argument("need at least two evaluation samples");
  std::vector<ProbeSample> samples;
  std::vector<ControlEmbedding> embeddings;
  for (std::size_t i = 0; i < n_eval; ++i) {
    samples.push_back(make_probe_sample(model.config, "probe/eval", i));
    const auto& input = *samples.back().cond.control;
    embeddings.push_back(
        encode_control(standardized_for(input, model), input.type, model));
  }

  Rng rng(sampler_seed);
  ProbeEval out;
  for (std::size_t i = 0; i < n_eval; ++i) {
    Rng matched_rng = rng.stream("sampler/matched", i);
    const Mat matched = sample(model, samples[i].cond.text, &embeddings[i], steps, omega,
                               matched_rng);
    out.matched += probe_correlation(matched, samples[i], model.config);

    Rng shuffled_rng = rng.stream("sampler/shuffled", i);
    const Mat shuffled = sample(model, samples[i].cond.text,
                                &embeddings[(i + 1) % n_eval], steps, omega, shuffled_rng);
    out.shuffled += probe_correlation(shuffled, samples[i], model.config);
  }
  out.matched /= double(n_eval);
  out.shuffled /= double(n_eval);
  return out;
}

}  // namespace condaudio::toy
