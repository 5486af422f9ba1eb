#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include <json.hpp>

#include "condaudio/acnd.hpp"
#include "condaudio/cli.hpp"
#include "condaudio/dataset.hpp"
#include "condaudio/errors.hpp"
#include "parallel.hpp"

namespace condaudio::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct FileResult {
  std::string id;
  std::size_t frames = 0;
  double voiced_ratio = 0.0;
  bool has_grid = false;
  std::string error;
};

}  // namespace

int run_extract(const ExtractOptions& opts) {
  if (opts.out_dir.empty()) throw std::invalid_argument("extract: --out is required");

  std::vector<fs::path> inputs;
  if (fs::is_directory(opts.input)) {
    for (const auto& entry : fs::directory_iterator(opts.input))
      if (entry.is_regular_file() && entry.path().extension() == ".wav")
        inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
  } else if (fs::exists(opts.input)) {
    inputs.push_back(opts.input);
  } else {
    throw DataError("extract: input not found: " + opts.input.string());
  }

  fs::create_directories(opts.out_dir);

  data::StrongLabels labels;
  std::optional<conditions::EventSet> event_set;
  if (!opts.labels.empty()) {
    labels = data::parse_strong_labels_file(opts.labels);
    std::set<std::string> names;
    for (const auto& [id, events] : labels.by_clip)
      for (const auto& e : events) names.insert(e.klass);
    if (!names.empty())
      event_set = conditions::EventSet(
          std::vector<std::string>(names.begin(), names.end()));
  }

  std::vector<FileResult> results(inputs.size());
  parallel_for(inputs.size(), [&](std::size_t i) {
    FileResult& r = results[i];
    r.id = inputs[i].stem().string();
    try {
      const auto audio = dsp::load_audio_16k(inputs[i]);
      if (audio.samples.empty()) throw DataError("empty audio");
      const auto spec = dsp::stft(audio, opts.window, opts.hop);
      const auto energy = dsp::frame_energy(spec);
      const auto pitch = dsp::estimate_f0(
          audio, {opts.pitch_min, opts.pitch_max, opts.hop, 0.3});
      r.frames = energy.frames();
      std::size_t voiced = 0;
      for (auto v : pitch.voiced) voiced += v ? 1 : 0;
      r.voiced_ratio = pitch.frames() ? double(voiced) / double(pitch.frames()) : 0.0;

      data::write_contour(opts.out_dir / (r.id + ".pitch.acnd"), pitch,
                          data::AcndKind::pitch);
      data::write_contour(opts.out_dir / (r.id + ".energy.acnd"), energy,
                          data::AcndKind::energy);

      if (event_set) {
        auto it = labels.by_clip.find(r.id);
        if (it != labels.by_clip.end()) {
          conditions::EventList clamped;
          const double clip_len = double(r.frames) / energy.frame_rate;
          for (auto e : it->second) {
            e.offset = std::min(e.offset, clip_len);
            if (e.onset < e.offset) clamped.push_back(e);
          }
          const auto grid = conditions::events_to_grid(clamped, *event_set,
                                                       energy.frame_rate, r.frames);
          data::write_grid(opts.out_dir / (r.id + ".grid.acnd"), grid);
          r.has_grid = true;
        }
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
  });

  json files = json::array();
  json errors = json::array();
  for (const auto& r : results) {
    if (!r.error.empty()) {
      errors.push_back({{"id", r.id}, {"error", r.error}});
      continue;
    }
    files.push_back({{"id", r.id},
                     {"frames", r.frames},
                     {"voiced_ratio", r.voiced_ratio},
                     {"grid", r.has_grid}});
  }
  json summary{{"files", files}, {"errors", errors}};
  {
    std::ofstream out(opts.out_dir / "extract-summary.json", std::ios::binary);
    if (!out) throw DataError("cannot write extraction summary");
    out << summary.dump(2) << "\n";
  }

  std::cout << "extracted " << files.size() << " of " << inputs.size() << " file(s)\n";
  for (const auto& e : errors)
    std::cerr << "error: " << e["id"].get<std::string>() << ": "
              << e["error"].get<std::string>() << "\n";
  return errors.empty() ? kExitOk : kExitData;
}

}  // namespace condaudio::cli
