#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "condaudio/acnd.hpp"
#include "condaudio/cli.hpp"
#include "condaudio/errors.hpp"
#include "condaudio/toy_checkpoint.hpp"
#include "condaudio/toy_probe.hpp"
#include "condaudio/toy_train.hpp"

namespace condaudio::cli {
namespace {

using namespace condaudio::toy;
using nlohmann::json;

ToyConfig load_config_or_default(const std::filesystem::path& path) {
  if (path.empty()) {
    ToyConfig c;
    c.validate();
    return c;
  }
  return ToyConfig::load(path);
}

std::vector<TrainSample> make_batch(const ToyConfig& config, const DiffusionSchedule& schedule,
                                    std::size_t step, std::size_t batch_size, const Rng& base) {
  std::vector<TrainSample> batch;
  batch.reserve(batch_size);
  for (std::size_t b = 0; b < batch_size; ++b) {
    const std::uint64_t index = step * batch_size + b;
    ProbeSample probe = make_probe_sample(config, "probe/train", index);
    TrainSample s;
    s.x0 = std::move(probe.x0);
    s.cond = std::move(probe.cond);
    Rng draw = base.stream("train/draw", index);
    s.t = 1 + std::size_t(draw.below(schedule.total_steps));
    s.noise = Mat(config.latent_len, config.latent_feat);
    for (double& v : s.noise.raw()) v = draw.normal();
    batch.push_back(std::move(s));
  }
  return batch;
}

}  // namespace

int run_toy_train(const ToyTrainOptions& opts) {
  if (opts.out_dir.empty()) throw std::invalid_argument("toy train: --out required");
  ToyConfig config = load_config_or_default(opts.config);
  if (opts.seed_set || opts.config.empty()) config.seed = opts.seed;
  config.validate();

  std::filesystem::create_directories(opts.out_dir);
  std::cout << "config:\n" << config.to_key_value();
  std::cout << "steps = " << opts.steps << "\nbatch = " << opts.batch
            << "\nlearning_rate = " << opts.learning_rate << "\ndropout = " << opts.dropout
            << "\n";

  ToyModel model = ToyModel::init(config);
  Trainer trainer(model);
  const auto schedule =
      DiffusionSchedule::linear(config.timesteps, config.beta_min, config.beta_max);
  const Rng base(config.seed);

  std::ofstream csv(opts.out_dir / "loss.csv", std::ios::binary);
  if (!csv) throw DataError("cannot write loss curve");
  csv << "step,loss\n";

  for (std::size_t step = 0; step < opts.steps; ++step) {
    auto batch = make_batch(config, schedule, step, opts.batch, base);
    Rng dropout_rng = base.stream("train/dropout", step);
    guidance_dropout(batch, opts.dropout, dropout_rng);
    const double loss = train_step(model, trainer, batch, opts.learning_rate);
    char line[64];
    std::snprintf(line, sizeof line, "%zu,%.9e\n", step, loss);
    csv << line;
    if (step % 50 == 0 || step + 1 == opts.steps)
      std::cout << "step " << step << " loss " << loss << "\n";
  }

  save_checkpoint(opts.out_dir / "checkpoint.bin", model);
  {
    std::ofstream cfg(opts.out_dir / "config.txt", std::ios::binary);
    if (!cfg) throw DataError("cannot write config");
    cfg << config.to_key_value();
  }
  std::cout << "checkpoint written to " << (opts.out_dir / "checkpoint.bin").string() << "\n";
  return kExitOk;
}

int run_toy_sample(const ToySampleOptions& opts) {
  if (opts.checkpoint.empty() || opts.config.empty() || opts.out.empty())
    throw std::invalid_argument("toy sample: --checkpoint, --config, --out required");
  const ToyConfig config = ToyConfig::load(opts.config);
  const ToyModel model = load_checkpoint(opts.checkpoint, config);

  const ProbeSample probe = make_probe_sample(config, "probe/eval", opts.probe_index);
  Rng rng = Rng(opts.seed).stream("cli/sample");
  Mat latent;
  if (opts.unconditional) {
    latent = sample(model, probe.cond.text, nullptr, opts.steps, opts.omega, rng);
  } else {
    const auto& input = *probe.cond.control;
    const auto emb = encode_control(standardized_for(input, model), input.type, model);
    latent = sample(model, probe.cond.text, &emb, opts.steps, opts.omega, rng);
  }
  data::write_matrix(opts.out, latent);
  std::cout << "seed = " << opts.seed << "\nomega = " << opts.omega
            << "\nsteps = " << opts.steps << "\nprobe_index = " << opts.probe_index
            << "\nwrote " << opts.out.string() << "\n";
  return kExitOk;
}

int run_toy_sweep(const ToySweepOptions& opts) {
  if (opts.checkpoint.empty() || opts.config.empty() || opts.out_dir.empty())
    throw std::invalid_argument("toy sweep: --checkpoint, --config, --out required");
  const ToyConfig config = ToyConfig::load(opts.config);
  const ToyModel model = load_checkpoint(opts.checkpoint, config);
  std::filesystem::create_directories(opts.out_dir);

  std::string table = "Guidance  Step  Matched  Shuffled  Gap\n";
  json rows = json::array();
  for (double omega : opts.guidance) {
    for (std::size_t steps : opts.steps) {
      const ProbeEval eval =
          evaluate_control_following(model, opts.seed, opts.n_eval, omega, steps);
      char line[128];
      std::snprintf(line, sizeof line, "%-8g  %-4zu  %7.4f  %8.4f  %7.4f\n", omega, steps,
                    eval.matched, eval.shuffled, eval.gap());
      table += line;
      rows.push_back({{"guidance", omega},
                      {"steps", steps},
                      {"matched", eval.matched},
                      {"shuffled", eval.shuffled},
                      {"gap", eval.gap()}});
    }
  }

  std::cout << table;
  {
    std::ofstream out(opts.out_dir / "sweep.txt", std::ios::binary);
    if (!out) throw DataError("cannot write sweep table");
    out << table;
  }
  {
    std::ofstream out(opts.out_dir / "sweep.json", std::ios::binary);
    if (!out) throw DataError("cannot write sweep json");
    out << json{{"seed", opts.seed}, {"n_eval", opts.n_eval}, {"rows", rows}}.dump(2) << "\n";
  }
  return kExitOk;
}

}  // namespace condaudio::cli
