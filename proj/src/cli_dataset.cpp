#include <fstream>
#include <iostream>
#include <sstream>

#include "condaudio/cli.hpp"
#include "condaudio/dataset.hpp"
#include "condaudio/errors.hpp"

namespace condaudio::cli {

int run_dataset_build(const DatasetBuildOptions& opts) {
  if (opts.audio_dir.empty() || opts.labels.empty() || opts.captions.empty() ||
      opts.out_dir.empty())
    throw std::invalid_argument("dataset build: --audio, --labels, --captions, --out required");

  data::DatasetConfig config;
  if (!opts.config.empty()) {
    std::ifstream in(opts.config);
    if (!in) throw DataError("cannot open dataset config: " + opts.config.string());
    std::stringstream ss;
    ss << in.rdbuf();
    config = data::DatasetConfig::from_json(ss.str());
  }

  const auto labels = data::parse_strong_labels_file(opts.labels);
  const auto captions = data::read_caption_json(opts.captions);

  data::BuildReport report;
  const auto manifest =
      data::build_manifest(labels, captions, opts.audio_dir, config, opts.out_dir, report);

  data::write_manifest(opts.out_dir / "manifest.jsonl", manifest);
  {
    std::ofstream out(opts.out_dir / "build-report.json", std::ios::binary);
    if (!out) throw DataError("cannot write build report");
    out << report.to_json();
  }
  {
    std::ofstream out(opts.out_dir / "dataset-config.json", std::ios::binary);
    if (!out) throw DataError("cannot write dataset config");
    out << manifest.config.to_json() << "\n";
  }

  std::cout << "built " << report.clips_built << " of " << report.clips_in
            << " clip(s); excluded " << report.excluded.size() << "; label errors "
            << report.label_errors.size() << "\n";
  return kExitOk;
}

int run_dataset_split(const DatasetSplitOptions& opts) {
  if (opts.manifest.empty()) throw std::invalid_argument("dataset split: --manifest required");
  auto manifest = data::read_manifest(opts.manifest);
  data::split_manifest(manifest, opts.train, opts.valid, opts.test, opts.seed,
                       opts.test_allowlist);
  const auto out = opts.out.empty() ? opts.manifest : opts.out;
  data::write_manifest(out, manifest);
  std::cout << "split " << manifest.records.size() << " record(s) into " << opts.train
            << "/" << opts.valid << "/" << opts.test << " (seed " << opts.seed << ")\n";
  return kExitOk;
}

}  // namespace condaudio::cli
