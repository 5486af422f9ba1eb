#include <CLI11.hpp>

#include "condaudio/cli.hpp"

int main(int argc, char** argv) {
  using namespace condaudio::cli;

  CLI::App app{"condaudio: condition extraction, toy conditional diffusion, and "
               "controllability metrics"};
  app.require_subcommand(1);

  ExtractOptions extract;
  auto* cmd_extract = app.add_subcommand("extract", "Extract pitch/energy/grid conditions");
  cmd_extract->add_option("--input", extract.input, "WAV file or directory")->required();
  cmd_extract->add_option("--out", extract.out_dir, "output directory")->required();
  cmd_extract->add_option("--labels", extract.labels, "strong-label TSV (enables grids)");
  cmd_extract->add_option("--window", extract.window, "STFT window size");
  cmd_extract->add_option("--hop", extract.hop, "hop size in samples");
  cmd_extract->add_option("--pitch-min", extract.pitch_min, "pitch range low (Hz)");
  cmd_extract->add_option("--pitch-max", extract.pitch_max, "pitch range high (Hz)");

  auto* cmd_dataset = app.add_subcommand("dataset", "Dataset construction");
  cmd_dataset->require_subcommand(1);

  DatasetBuildOptions build;
  auto* cmd_build = cmd_dataset->add_subcommand("build", "Build a manifest with conditions");
  cmd_build->add_option("--audio", build.audio_dir, "audio directory")->required();
  cmd_build->add_option("--labels", build.labels, "strong-label TSV")->required();
  cmd_build->add_option("--captions", build.captions, "caption JSON (id -> text)")->required();
  cmd_build->add_option("--out", build.out_dir, "output directory")->required();
  cmd_build->add_option("--config", build.config, "dataset-config JSON override");

  DatasetSplitOptions split;
  auto* cmd_split = cmd_dataset->add_subcommand("split", "Assign train/valid/test splits");
  cmd_split->add_option("--manifest", split.manifest, "manifest.jsonl path")->required();
  cmd_split->add_option("--out", split.out, "output manifest (default: in place)");
  cmd_split->add_option("--train", split.train, "train count")->required();
  cmd_split->add_option("--valid", split.valid, "valid count")->required();
  cmd_split->add_option("--test", split.test, "test count")->required();
  cmd_split->add_option("--seed", split.seed, "shuffle seed");
  cmd_split->add_option("--test-allowlist", split.test_allowlist,
                        "classes eligible for the test split");

  auto* cmd_toy = app.add_subcommand("toy", "Toy conditional diffusion model");
  cmd_toy->require_subcommand(1);

  ToyTrainOptions train;
  auto* cmd_train = cmd_toy->add_subcommand("train", "Train on the synthetic probe data");
  cmd_train->add_option("--config", train.config, "model config (key = value)");
  cmd_train->add_option("--out", train.out_dir, "output directory")->required();
  cmd_train->add_option("--steps", train.steps, "training steps");
  cmd_train->add_option("--batch", train.batch, "batch size");
  cmd_train->add_option("--lr", train.learning_rate, "learning rate");
  cmd_train->add_option("--dropout", train.dropout, "guidance dropout probability");
  auto* train_seed = cmd_train->add_option("--seed", train.seed, "seed (overrides config)");

  ToySampleOptions sample;
  auto* cmd_sample = cmd_toy->add_subcommand("sample", "Sample a latent from a checkpoint");
  cmd_sample->add_option("--checkpoint", sample.checkpoint, "checkpoint path")->required();
  cmd_sample->add_option("--config", sample.config, "model config path")->required();
  cmd_sample->add_option("--out", sample.out, "output latent file")->required();
  cmd_sample->add_option("--seed", sample.seed, "sampler seed");
  cmd_sample->add_option("--omega", sample.omega, "guidance scale");
  cmd_sample->add_option("--steps", sample.steps, "inference steps");
  cmd_sample->add_option("--probe-index", sample.probe_index, "evaluation condition index");
  cmd_sample->add_flag("--unconditional", sample.unconditional, "drop the control condition");

  ToySweepOptions sweep;
  auto* cmd_sweep = cmd_toy->add_subcommand("sweep", "Guidance x steps controllability grid");
  cmd_sweep->add_option("--checkpoint", sweep.checkpoint, "checkpoint path")->required();
  cmd_sweep->add_option("--config", sweep.config, "model config path")->required();
  cmd_sweep->add_option("--out", sweep.out_dir, "output directory")->required();
  cmd_sweep->add_option("--seed", sweep.seed, "sampler seed");
  cmd_sweep->add_option("--guidance", sweep.guidance, "guidance scales");
  cmd_sweep->add_option("--steps", sweep.steps, "inference step counts");
  cmd_sweep->add_option("--n-eval", sweep.n_eval, "probe samples per grid cell");

  EvalOptions eval;
  auto* cmd_eval = app.add_subcommand("eval", "Controllability metrics");
  cmd_eval->add_option("--kind", eval.kind, "temporal | pitch | energy | all");
  cmd_eval->add_option("--refs", eval.refs_events, "reference event TSV");
  cmd_eval->add_option("--preds", eval.preds_events, "prediction event TSV");
  cmd_eval->add_option("--refs-contours", eval.refs_contours, "reference contour directory");
  cmd_eval->add_option("--preds-contours", eval.preds_contours, "prediction contour directory");
  cmd_eval->add_option("--dataset-config", eval.dataset_config,
                       "dataset-config JSON (quantization ranges)");
  cmd_eval->add_option("--out", eval.out_dir, "report output directory");
  cmd_eval->add_option("--settings-name", eval.settings_name, "row label in the report");

  CLI11_PARSE(app, argc, argv);

  if (cmd_extract->parsed()) return guarded<ExtractOptions>("extract", run_extract, extract);
  if (cmd_build->parsed()) return guarded<DatasetBuildOptions>("dataset build", run_dataset_build, build);
  if (cmd_split->parsed()) return guarded<DatasetSplitOptions>("dataset split", run_dataset_split, split);
  if (cmd_train->parsed()) {
    train.seed_set = train_seed->count() > 0;
    return guarded<ToyTrainOptions>("toy train", run_toy_train, train);
  }
  if (cmd_sample->parsed()) return guarded<ToySampleOptions>("toy sample", run_toy_sample, sample);
  if (cmd_sweep->parsed()) return guarded<ToySweepOptions>("toy sweep", run_toy_sweep, sweep);
  if (cmd_eval->parsed()) return guarded<EvalOptions>("eval", run_eval, eval);
  return kExitUsage;
}
