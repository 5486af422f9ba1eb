#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace condaudio::cli {

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct ExtractOptions {
  std::filesystem::path input;  // WAV file or directory
  std::filesystem::path out_dir;
  std::filesystem::path labels;  // optional strong-label TSV; enables grid output
  std::size_t window = 1024;
  std::size_t hop = 160;
  float pitch_min = 40.0f;
  float pitch_max = 1600.0f;
};

struct DatasetBuildOptions {
  std::filesystem::path audio_dir;
  std::filesystem::path labels;
  std::filesystem::path captions;
  std::filesystem::path out_dir;
  std::filesystem::path config;  // optional dataset-config JSON override
};

struct DatasetSplitOptions {
  std::filesystem::path manifest;
  std::filesystem::path out;  // empty: rewrite the input manifest
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
  std::uint64_t seed = 7;
  std::vector<std::string> test_allowlist;
};

struct ToyTrainOptions {
  std::filesystem::path config;  // optional key-value file; defaults otherwise
  std::filesystem::path out_dir;
  std::size_t steps = 500;
  std::size_t batch = 8;
  double learning_rate = 0.04;
  double dropout = 0.1;
  std::uint64_t seed = 7;
  bool seed_set = false;  // --seed overrides the config seed when given
};

struct ToySampleOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path config;
  std::filesystem::path out;  // latent file
  std::uint64_t seed = 7;
  double omega = 5.0;
  std::size_t steps = 50;
  std::size_t probe_index = 0;
  bool unconditional = false;
};

struct ToySweepOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::uint64_t seed = 7;
  std::vector<double> guidance = {1.0, 3.0, 5.0, 10.0};
  std::vector<std::size_t> steps = {10, 50, 100, 200};
  std::size_t n_eval = 4;
};

struct EvalOptions {
  std::string kind = "all";  // temporal | pitch | energy | all
  std::filesystem::path refs_events;
  std::filesystem::path preds_events;
  std::filesystem::path refs_contours;
  std::filesystem::path preds_contours;
  std::filesystem::path dataset_config;  // optional; pins quantization ranges
  std::filesystem::path out_dir = ".";
  std::string settings_name = "eval";
};

int run_extract(const ExtractOptions& opts);
int run_dataset_build(const DatasetBuildOptions& opts);
int run_dataset_split(const DatasetSplitOptions& opts);
int run_toy_train(const ToyTrainOptions& opts);
int run_toy_sample(const ToySampleOptions& opts);
int run_toy_sweep(const ToySweepOptions& opts);
int run_eval(const EvalOptions& opts);

// Maps an escaped exception to the documented exit codes, printing the
// message to stderr.
int run_guarded(const std::string& what, int (*fn)(const void*), const void* opts);

template <typename Opts>
int guarded(const std::string& what, int (*fn)(const Opts&), const Opts& opts) {
  struct Thunk {
    int (*fn)(const Opts&);
    const Opts* opts;
  } thunk{fn, &opts};
  return run_guarded(what, [](const void* p) {
    const auto* t = static_cast<const Thunk*>(p);
    return t->fn(*t->opts);
  }, &thunk);
}

}  // namespace condaudio::cli
