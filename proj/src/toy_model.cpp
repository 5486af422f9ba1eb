#include "condaudio/toy_model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "condaudio/errors.hpp"
#include "toy_forward.hpp"

namespace condaudio::toy {
namespace {

Mat gaussian(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Mat m(rows, cols);
  for (double& v : m.raw()) v = scale * rng.normal();
  return m;
}

Mat identity_plus_noise(Rng& rng, std::size_t n, double noise) {
  Mat m = gaussian(rng, n, n, noise);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
  return m;
}

// Transformer-style sinusoidal position codes; shared by the frozen latent
// tokens and the control encoder's initial position table so that attention
// can align the two time axes from the start.
Mat position_code(std::size_t length, std::size_t dim, double scale) {
  Mat m(length, dim);
  for (std::size_t l = 0; l < length; ++l) {
    const Mat row = sinusoidal_time_embedding(l, dim);
    for (std::size_t j = 0; j < dim; ++j) m(l, j) = scale * row(0, j);
  }
  return m;
}

// Bin embeddings start on a smooth ray (value-proportional along a fixed
// direction) so contour content is linearly decodable before training.
Mat bin_ray(Rng& rng, std::size_t bins, std::size_t dim, double noise) {
  Mat ray = gaussian(rng, 1, dim, 1.0);
  double norm = 0.0;
  for (double v : ray.raw()) norm += v * v;
  norm = std::sqrt(norm);
  Mat m = gaussian(rng, bins, dim, noise);
  for (std::size_t b = 0; b < bins; ++b) {
    const double level = 2.0 * double(b) / double(bins - 1) - 1.0;
    for (std::size_t j = 0; j < dim; ++j) m(b, j) += level * ray(0, j) / norm;
  }
  return m;
}

// Strided averaging window plus noise; keeps token content and position codes
// recognizable through the downsampling at initialization.
Mat averaging_conv(Rng& rng, std::size_t stride, std::size_t dim, double noise) {
  Mat m = gaussian(rng, stride * dim, dim, noise);
  for (std::size_t k = 0; k < stride; ++k)
    for (std::size_t h = 0; h < dim; ++h) m(k * dim + h, h) += 1.0 / double(stride);
  return m;
}

// Gram-Schmidt over columns; input must have rows >= cols.
Mat orthonormal_columns(Rng& rng, std::size_t rows, std::size_t cols) {
  Mat m = gaussian(rng, rows, cols, 1.0);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t p = 0; p < c; ++p) {
      double dot = 0.0;
      for (std::size_t r = 0; r < rows; ++r) dot += m(r, c) * m(r, p);
      for (std::size_t r = 0; r < rows; ++r) m(r, c) -= dot * m(r, p);
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < rows; ++r) norm += m(r, c) * m(r, c);
    norm = std::sqrt(norm);
    if (norm < 1e-9) throw DivergenceError("degenerate orthonormal initialization");
    for (std::size_t r = 0; r < rows; ++r) m(r, c) /= norm;
  }
  return m;
}

}  // namespace

void ToyConfig::validate() const {
  if (latent_len == 0 || latent_feat == 0 || hidden == 0 || text_len == 0 || text_dim == 0 ||
      control_len == 0 || n_layers == 0 || ffn_hidden == 0 || label_dim == 0)
    throw std::invalid_argument("toy config: all dimensions must be positive");
  if (hidden % 2 != 0)
    throw std::invalid_argument("toy config: hidden size must be even");
  if (strides.size() != n_layers)
    throw std::invalid_argument("toy config: need one stride per layer");
  for (auto s : strides)
    if (s == 0) throw std::invalid_argument("toy config: strides must be positive");
  if (pitch_bins < 2 || energy_bins < 2)
    throw std::invalid_argument("toy config: bin tables need at least 2 bins");
  if (timesteps == 0) throw std::invalid_argument("toy config: timesteps must be positive");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
    throw std::invalid_argument("toy config: require 0 < beta_min <= beta_max < 1");
}

std::string ToyConfig::canonical_text() const { return to_key_value(); }

std::uint64_t ToyConfig::digest() const { return fnv1a64(canonical_text()); }

std::string ToyConfig::to_key_value() const {
  std::ostringstream ss;
  ss << "latent_len = " << latent_len << "\n";
  ss << "latent_feat = " << latent_feat << "\n";
  ss << "hidden = " << hidden << "\n";
  ss << "text_len = " << text_len << "\n";
  ss << "text_dim = " << text_dim << "\n";
  ss << "control_len = " << control_len << "\n";
  ss << "n_layers = " << n_layers << "\n";
  ss << "strides = ";
  for (std::size_t i = 0; i < strides.size(); ++i) ss << (i ? "," : "") << strides[i];
  ss << "\n";
  ss << "ffn_hidden = " << ffn_hidden << "\n";
  ss << "pitch_bins = " << pitch_bins << "\n";
  ss << "energy_bins = " << energy_bins << "\n";
  ss << "label_dim = " << label_dim << "\n";
  ss << "timesteps = " << timesteps << "\n";
  ss << "beta_min = " << beta_min << "\n";
  ss << "beta_max = " << beta_max << "\n";
  ss << "seed = " << seed << "\n";
  return ss.str();
}

ToyConfig ToyConfig::from_key_value(const std::string& text) {
  ToyConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "latent_len") c.latent_len = std::stoul(value);
      else if (key == "latent_feat") c.latent_feat = std::stoul(value);
      else if (key == "hidden") c.hidden = std::stoul(value);
      else if (key == "text_len") c.text_len = std::stoul(value);
      else if (key == "text_dim") c.text_dim = std::stoul(value);
      else if (key == "control_len") c.control_len = std::stoul(value);
      else if (key == "n_layers") c.n_layers = std::stoul(value);
      else if (key == "ffn_hidden") c.ffn_hidden = std::stoul(value);
      else if (key == "pitch_bins") c.pitch_bins = std::stoul(value);
      else if (key == "energy_bins") c.energy_bins = std::stoul(value);
      else if (key == "label_dim") c.label_dim = std::stoul(value);
      else if (key == "timesteps") c.timesteps = std::stoul(value);
      else if (key == "beta_min") c.beta_min = std::stod(value);
      else if (key == "beta_max") c.beta_max = std::stod(value);
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "strides") {
        c.strides.clear();
        std::istringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) c.strides.push_back(std::stoul(trim(item)));
      } else {
        throw DataError("config line " + std::to_string(line_no) + ": unknown key " + key);
      }
    } catch (const DataError&) {
      throw;
    } catch (const std::exception&) {
      throw DataError("config line " + std::to_string(line_no) + ": bad value for " + key);
    }
  }
  c.validate();
  return c;
}

ToyConfig ToyConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_key_value(ss.str());
}

DiffusionSchedule DiffusionSchedule::linear(std::size_t total_steps, double beta_min,
                                            double beta_max) {
  if (total_steps == 0) throw std::invalid_argument("schedule needs at least one step");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
    throw std::invalid_argument("schedule: require 0 < beta_min <= beta_max < 1");
  DiffusionSchedule s;
  s.total_steps = total_steps;
  s.betas.resize(total_steps);
  s.alpha_bars.resize(total_steps);
  double prod = 1.0;
  for (std::size_t i = 0; i < total_steps; ++i) {
    s.betas[i] = total_steps == 1
                     ? beta_min
                     : beta_min + (beta_max - beta_min) * double(i) / double(total_steps - 1);
    prod *= 1.0 - s.betas[i];
    s.alpha_bars[i] = prod;
  }
  return s;
}

double DiffusionSchedule::alpha_bar(std::size_t t) const {
  if (t < 1 || t > total_steps)
    throw std::invalid_argument("diffusion step out of range: " + std::to_string(t));
  return alpha_bars[t - 1];
}

Mat& ParamSet::add(const std::string& name, Mat value) {
  if (has(name)) throw std::logic_error("duplicate parameter: " + name);
  items_.emplace_back(name, std::move(value));
  return items_.back().second;
}

Mat& ParamSet::at(const std::string& name) {
  for (auto& [n, m] : items_)
    if (n == name) return m;
  throw std::logic_error("unknown parameter: " + name);
}

const Mat& ParamSet::at(const std::string& name) const {
  for (const auto& [n, m] : items_)
    if (n == name) return m;
  throw std::logic_error("unknown parameter: " + name);
}

bool ParamSet::has(const std::string& name) const {
  for (const auto& [n, m] : items_)
    if (n == name) return true;
  return false;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : items_) n += m.size();
  return n;
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (const auto& [name, m] : items_) out.add(name, Mat(m.rows(), m.cols()));
  return out;
}

bool ParamSet::same_values(const ParamSet& other) const {
  if (items_.size() != other.items_.size()) return false;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].first != other.items_[i].first) return false;
    const Mat& a = items_[i].second;
    const Mat& b = other.items_[i].second;
    if (!a.same_shape(b)) return false;
    if (std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) != 0) return false;
  }
  return true;
}

ToyModel ToyModel::init(const ToyConfig& config) {
  config.validate();
  ToyModel m;
  m.config = config;
  const std::size_t H = config.hidden;
  const std::size_t F = config.latent_feat;
  const std::size_t E = config.label_dim;
  const double inv_h = 1.0 / std::sqrt(double(H));
  const double inv_t = 1.0 / std::sqrt(double(config.text_dim));

  Rng frozen_rng = Rng(config.seed).stream("init/frozen");
  m.frozen.add("backbone.in_proj", gaussian(frozen_rng, F, H, 1.0 / std::sqrt(double(F))));
  m.frozen.add("backbone.pos", position_code(config.latent_len, H, 0.5));
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    const std::string p = "backbone.layer" + std::to_string(i);
    m.frozen.add(p + ".w", gaussian(frozen_rng, H, H, inv_h));
    m.frozen.add(p + ".b", Mat(1, H));
    m.frozen.add(p + ".t_proj", gaussian(frozen_rng, H, H, inv_h));
    m.frozen.add(p + ".attn.wq", gaussian(frozen_rng, H, H, inv_h));
    m.frozen.add(p + ".attn.wk", gaussian(frozen_rng, config.text_dim, H, inv_t));
    m.frozen.add(p + ".attn.wv", gaussian(frozen_rng, config.text_dim, H, inv_t));
    m.frozen.add(p + ".attn.wo", gaussian(frozen_rng, H, H, inv_h));
  }
  // Small output gain: the untrained backbone predicts near-zero noise.
  m.frozen.add("backbone.out_proj", gaussian(frozen_rng, H, F, 0.25 * inv_h));
  m.frozen.add("vae.proj", orthonormal_columns(frozen_rng, 4 * F, F));

  Rng train_rng = Rng(config.seed).stream("init/trainable");
  m.trainable.add("encoder.mlp.w1", identity_plus_noise(train_rng, H, 0.05));
  m.trainable.add("encoder.mlp.b1", Mat(1, H));
  m.trainable.add("encoder.mlp.w2", identity_plus_noise(train_rng, H, 0.05));
  m.trainable.add("encoder.mlp.b2", Mat(1, H));
  {
    Mat pos = position_code(config.control_len, H, 0.5);
    const Mat jitter = gaussian(train_rng, config.control_len, H, 0.02);
    for (std::size_t i = 0; i < pos.size(); ++i) pos.raw()[i] += jitter.raw()[i];
    m.trainable.add("encoder.pos", std::move(pos));
  }
  m.trainable.add("encoder.cls", gaussian(train_rng, 3, H, 0.05));
  m.trainable.add("encoder.pitch_table", bin_ray(train_rng, config.pitch_bins, H, 0.05));
  m.trainable.add("encoder.energy_table", bin_ray(train_rng, config.energy_bins, H, 0.05));
  m.trainable.add("encoder.label_proj", gaussian(train_rng, E, H, 1.0 / std::sqrt(double(E))));
  m.trainable.add("null.text", gaussian(train_rng, 1, config.text_dim, 0.01));
  m.trainable.add("null.control", gaussian(train_rng, 1, H, 0.01));
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    const std::string p = "fusion" + std::to_string(i);
    // shared query/key start so position codes align across the time axes
    Mat wq = gaussian(train_rng, H, H, inv_h);
    m.trainable.add(p + ".attn.wq", wq);
    m.trainable.add(p + ".attn.wk", std::move(wq));
    m.trainable.add(p + ".attn.wv", identity_plus_noise(train_rng, H, 0.05));
    m.trainable.add(p + ".attn.wo", identity_plus_noise(train_rng, H, 0.05));
    m.trainable.add(p + ".ffn.w1", gaussian(train_rng, H, config.ffn_hidden, inv_h));
    m.trainable.add(p + ".ffn.b1", Mat(1, config.ffn_hidden));
    m.trainable.add(p + ".ffn.w2",
                    gaussian(train_rng, config.ffn_hidden, H,
                             1.0 / std::sqrt(double(config.ffn_hidden))));
    m.trainable.add(p + ".ffn.b2", Mat(1, H));
    m.trainable.add(p + ".gate", Mat(1, 1, 0.0));  // zero-gate: fusion starts as identity
    const std::size_t stride = config.strides[i];
    m.trainable.add("down" + std::to_string(i) + ".w",
                    averaging_conv(train_rng, stride, H, 0.05));
    m.trainable.add("down" + std::to_string(i) + ".b", Mat(1, H));
  }
  return m;
}

// --- graph builders ----------------------------------------------------------

namespace detail {

Graph::NodeId ForwardCtx::param(const std::string& name) {
  auto it = bound_.find(name);
  if (it != bound_.end()) return it->second;
  Graph::NodeId id;
  if (model.trainable.has(name)) {
    id = g.param(model.trainable.at(name), grads ? &grads->at(name) : nullptr);
  } else {
    id = g.param(model.frozen.at(name), nullptr);
  }
  bound_.emplace(name, id);
  return id;
}

Graph::NodeId ForwardCtx::attention(Graph::NodeId queries_from, Graph::NodeId kv_from,
                                    const std::string& prefix) {
  auto q = g.matmul(queries_from, param(prefix + ".wq"));
  auto k = g.matmul(kv_from, param(prefix + ".wk"));
  auto v = g.matmul(kv_from, param(prefix + ".wv"));
  auto scores = g.scale(g.matmul(q, g.transpose_of(k)),
                        1.0 / std::sqrt(double(model.config.hidden)));
  return g.matmul(g.matmul(g.softmax_rows(scores), v), param(prefix + ".wo"));
}

Graph::NodeId ForwardCtx::standardize_node(const ControlInput& input) {
  const std::size_t L = model.config.control_len;
  switch (input.type) {
    case ConditionType::timestamp: {
      if (input.grid.cols() != L)
        throw std::invalid_argument("timestamp grid frame count mismatch");
      if (input.grid.rows() != input.provider_emb.rows())
        throw std::invalid_argument("grid and provider embedding disagree on class count");
      auto label = g.matmul(g.input(input.provider_emb), param("encoder.label_proj"));
      return g.matmul(g.transpose_of(g.input(input.grid)), label);
    }
    case ConditionType::pitch:
    case ConditionType::energy: {
      if (input.bins.size() != L)
        throw std::invalid_argument("contour frame count mismatch");
      const char* table = input.type == ConditionType::pitch ? "encoder.pitch_table"
                                                             : "encoder.energy_table";
      std::vector<std::size_t> idx(input.bins.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        if (input.bins[i] < 0) throw std::invalid_argument("negative bin index");
        idx[i] = std::size_t(input.bins[i]);
      }
      return g.gather_rows(param(table), std::move(idx));
    }
  }
  throw std::invalid_argument("unknown condition type");
}

Graph::NodeId ForwardCtx::encode_control_node(Graph::NodeId standardized, ConditionType type) {
  const int ti = int(type);
  if (ti < 0 || ti > 2) throw std::invalid_argument("unknown condition type id");
  auto x = g.add(standardized, param("encoder.pos"));
  auto h = g.tanh_act(g.add_row(g.matmul(x, param("encoder.mlp.w1")), param("encoder.mlp.b1")));
  auto y = g.add_row(g.matmul(h, param("encoder.mlp.w2")), param("encoder.mlp.b2"));
  auto cls = g.slice_rows(param("encoder.cls"), std::size_t(ti), std::size_t(ti) + 1);
  return g.add_row(y, cls);
}

std::vector<Graph::NodeId> ForwardCtx::control_groups_from_tokens(Graph::NodeId tokens) {
  std::vector<Graph::NodeId> groups;
  for (std::size_t i = 0; i < model.config.n_layers; ++i) {
    const std::string d = "down" + std::to_string(i);
    groups.push_back(g.conv_rows(tokens, param(d + ".w"), param(d + ".b"),
                                 model.config.strides[i]));
  }
  return groups;
}

std::vector<Graph::NodeId> ForwardCtx::control_groups(const Conditioning& cond) {
  if (cond.null_condition) {
    auto null_token = param("null.control");
    return std::vector<Graph::NodeId>(model.config.n_layers, null_token);
  }
  if (!cond.control) return {};
  auto tokens = encode_control_node(standardize_node(*cond.control), cond.control->type);
  return control_groups_from_tokens(tokens);
}

Graph::NodeId ForwardCtx::fusion_node(Graph::NodeId mel, Graph::NodeId control,
                                      std::size_t layer) {
  const std::string p = "fusion" + std::to_string(layer);
  const std::size_t n_control = g.value(control).rows();
  const std::size_t n_mel = g.value(mel).rows();
  auto z = n_control > 0 ? g.concat_rows(control, mel) : mel;
  auto attended = attention(z, z, p + ".attn");
  auto sel = g.slice_rows(attended, n_control, n_control + n_mel);
  auto f1 = g.tanh_act(g.add_row(g.matmul(sel, param(p + ".ffn.w1")), param(p + ".ffn.b1")));
  auto f = g.add_row(g.matmul(f1, param(p + ".ffn.w2")), param(p + ".ffn.b2"));
  return g.add(mel, g.mul_by_scalar(f, param(p + ".gate")));
}

Graph::NodeId ForwardCtx::text_node(const Conditioning& cond) {
  if (cond.null_condition) return param("null.text");
  if (cond.text.tokens.cols() != model.config.text_dim)
    throw std::invalid_argument("text embedding width mismatch");
  return g.input(cond.text.tokens);
}

Graph::NodeId ForwardCtx::predict_noise_node(const Mat& x_t, std::size_t t,
                                             Graph::NodeId text,
                                             const std::vector<Graph::NodeId>* groups) {
  const ToyConfig& c = model.config;
  if (x_t.rows() != c.latent_len || x_t.cols() != c.latent_feat)
    throw std::invalid_argument("latent shape mismatch");
  if (t < 1 || t > c.timesteps)
    throw std::invalid_argument("diffusion step out of range: " + std::to_string(t));

  auto h = g.add(g.matmul(g.input(x_t), param("backbone.in_proj")), param("backbone.pos"));
  auto temb = g.input(sinusoidal_time_embedding(t, c.hidden));
  for (std::size_t i = 0; i < c.n_layers; ++i) {
    const std::string p = "backbone.layer" + std::to_string(i);
    auto u = g.add_row(g.add_row(g.matmul(h, param(p + ".w")), param(p + ".b")),
                       g.matmul(temb, param(p + ".t_proj")));
    auto attended = attention(u, text, p + ".attn");
    auto mixed = g.add(u, attended);
    h = (groups && !groups->empty()) ? fusion_node(mixed, (*groups)[i], i) : mixed;
  }
  return g.matmul(h, param("backbone.out_proj"));
}

}  // namespace detail

// --- public operations -------------------------------------------------------

ControlEmbedding encode_control(const Mat& standardized, ConditionType type,
                                const ToyModel& model) {
  if (standardized.rows() != model.config.control_len ||
      standardized.cols() != model.config.hidden)
    throw std::invalid_argument("standardized condition must be control_len x hidden");
  detail::ForwardCtx ctx(model, nullptr);
  auto node = ctx.encode_control_node(ctx.g.input(standardized), type);
  return {ctx.g.value(node), type};
}

Mat forward_diffuse(const Mat& x0, std::size_t t, const Mat& noise,
                    const DiffusionSchedule& schedule) {
  if (!x0.same_shape(noise)) throw std::invalid_argument("x0/noise shape mismatch");
  const double ab = schedule.alpha_bar(t);
  const double a = std::sqrt(ab);
  const double b = std::sqrt(1.0 - ab);
  Mat out = x0;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.raw()[i] = a * x0.raw()[i] + b * noise.raw()[i];
  return out;
}

ControlTokenSet downsample_control(const ControlEmbedding& embedding, const ToyModel& model) {
  if (embedding.tokens.cols() != model.config.hidden)
    throw std::invalid_argument("control embedding width mismatch");
  detail::ForwardCtx ctx(model, nullptr);
  auto groups = ctx.control_groups_from_tokens(ctx.g.input(embedding.tokens));
  ControlTokenSet out;
  for (auto id : groups) out.groups.push_back(ctx.g.value(id));
  return out;
}

Mat fusion_forward(const Mat& mel_tokens, const Mat& control_tokens, const ToyModel& model,
                   std::size_t layer) {
  if (layer >= model.config.n_layers) throw std::invalid_argument("layer out of range");
  if (mel_tokens.cols() != model.config.hidden)
    throw std::invalid_argument("mel token width mismatch");
  if (control_tokens.rows() > 0 && control_tokens.cols() != mel_tokens.cols())
    throw std::invalid_argument("control token width mismatch");
  detail::ForwardCtx ctx(model, nullptr);
  auto mel = ctx.g.input(mel_tokens);
  auto ctrl = ctx.g.input(control_tokens.rows() > 0 ? control_tokens
                                                    : Mat(0, mel_tokens.cols()));
  return ctx.g.value(ctx.fusion_node(mel, ctrl, layer));
}

Mat predict_noise(const Mat& x_t, std::size_t t, const TextEmbedding& text,
                  const ControlEmbedding* control, const ToyModel& model) {
  detail::ForwardCtx ctx(model, nullptr);
  Conditioning cond;
  cond.text = text;
  auto text_id = ctx.text_node(cond);
  std::vector<Graph::NodeId> groups;
  if (control) {
    if (control->tokens.cols() != model.config.hidden)
      throw std::invalid_argument("control embedding width mismatch");
    groups = ctx.control_groups_from_tokens(ctx.g.input(control->tokens));
  }
  auto out = ctx.predict_noise_node(x_t, t, text_id, control ? &groups : nullptr);
  return ctx.g.value(out);
}

double ldm_loss(const ToyModel& model, const Mat& x0, std::size_t t, const Mat& noise,
                const Conditioning& cond) {
  const auto schedule =
      DiffusionSchedule::linear(model.config.timesteps, model.config.beta_min,
                                model.config.beta_max);
  const Mat x_t = forward_diffuse(x0, t, noise, schedule);
  detail::ForwardCtx ctx(model, nullptr);
  auto text = ctx.text_node(cond);
  auto groups = ctx.control_groups(cond);
  const bool has_control = cond.null_condition || cond.control.has_value();
  auto pred = ctx.predict_noise_node(x_t, t, text, has_control ? &groups : nullptr);
  auto loss = ctx.g.mean_sq_diff(pred, ctx.g.input(noise));
  return ctx.g.value(loss)(0, 0);
}

Mat cfg_combine(const Mat& eps_cond, const Mat& eps_uncond, double omega) {
  if (!eps_cond.same_shape(eps_uncond))
    throw std::invalid_argument("cfg_combine: shape mismatch");
  Mat out = eps_cond;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.raw()[i] = omega * eps_cond.raw()[i] + (1.0 - omega) * eps_uncond.raw()[i];
  return out;
}

Mat standardized_for(const ControlInput& input, const ToyModel& model) {
  detail::ForwardCtx ctx(model, nullptr);
  return ctx.g.value(ctx.standardize_node(input));
}

Mat sinusoidal_time_embedding(std::size_t t, std::size_t dim) {
  if (dim % 2 != 0) throw std::invalid_argument("time embedding dimension must be even");
  Mat out(1, dim);
  const std::size_t half = dim / 2;
  for (std::size_t i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * double(i) / double(half));
    out(0, 2 * i) = std::sin(double(t) * freq);
    out(0, 2 * i + 1) = std::cos(double(t) * freq);
  }
  return out;
}

TextEmbedding pseudo_text_embedding(const std::string& caption, const ToyConfig& config) {
  Rng base(mix64(fnv1a64(caption)));
  TextEmbedding out;
  out.tokens = Mat(config.text_len, config.text_dim);
  for (std::size_t i = 0; i < config.text_len; ++i) {
    Rng token = base.stream("text-token", i);
    for (std::size_t j = 0; j < config.text_dim; ++j) out.tokens(i, j) = token.normal();
  }
  return out;
}

}  // namespace condaudio::toy
