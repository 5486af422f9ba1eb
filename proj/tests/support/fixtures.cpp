#include "support/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "condaudio/rng.hpp"
#include "condaudio/wav.hpp"

namespace testsupport {
namespace {

using condaudio::Rng;

struct FixtureEvent {
  std::string klass;
  double onset;
  double offset;
};

constexpr double kTau = 2.0 * std::numbers::pi;

// Class signatures: tonal events carry a fixed fundamental, "water" is a
// noise burst (stays unvoiced under the pitch tracker).
double class_tone_hz(const std::string& klass) {
  if (klass == "alarm") return 880.0;
  if (klass == "dog") return 300.0;
  if (klass == "speech") return 150.0;
  return 0.0;
}

}  // namespace

FixtureCorpus make_fixture_corpus(const std::filesystem::path& dir, std::size_t n_clips,
                                  std::uint64_t seed) {
  namespace fs = std::filesystem;
  FixtureCorpus corpus;
  corpus.root = dir;
  corpus.audio_dir = dir / "audio";
  corpus.labels_tsv = dir / "labels.tsv";
  corpus.captions_json = dir / "captions.json";
  fs::create_directories(corpus.audio_dir);

  const std::vector<std::string> classes = {"alarm", "dog", "speech", "water"};
  Rng base(seed);

  std::ostringstream labels;
  labels << "segment_id\tstart_time_seconds\tend_time_seconds\tlabel\n";
  nlohmann::json captions = nlohmann::json::object();

  for (std::size_t i = 0; i < n_clips; ++i) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "clip%03zu", i);
    const std::string id = idbuf;
    corpus.ids.push_back(id);

    double duration = 10.0;
    if (i == 1) duration = 9.2;   // padded at build time
    if (i == 2) duration = 11.0;  // center-cropped at build time

    Rng rng = base.stream("clip", i);
    const auto n_samples = std::size_t(duration * 16000.0);
    std::vector<float> samples(n_samples);
    for (auto& s : samples) s = float(0.002 * rng.normal());

    const std::size_t n_events = 1 + rng.below(3);
    std::vector<FixtureEvent> events;
    std::set<std::string> present;
    for (std::size_t e = 0; e < n_events; ++e) {
      const std::string& klass = classes[rng.below(classes.size())];
      const double len = rng.uniform_in(0.6, 2.5);
      const double onset = rng.uniform_in(0.0, std::max(0.1, duration - len - 0.1));
      const double offset = std::min(onset + len, duration);
      events.push_back({klass, onset, offset});
      present.insert(klass);

      const double tone = class_tone_hz(klass);
      const double vibrato = rng.uniform_in(0.0, 0.02);
      const auto a = std::size_t(onset * 16000.0);
      const auto b = std::min(n_samples, std::size_t(offset * 16000.0));
      for (std::size_t s = a; s < b; ++s) {
        const double t = double(s) / 16000.0;
        double v;
        if (tone > 0.0) {
          const double f = tone * (1.0 + vibrato * std::sin(kTau * 2.0 * t));
          v = 0.30 * std::sin(kTau * f * t);
        } else {
          v = 0.20 * rng.normal();
        }
        // 20 ms raised-cosine edges keep the bursts click-free
        const double edge = 0.02;
        const double rel_in = (double(s) / 16000.0 - onset) / edge;
        const double rel_out = (offset - double(s) / 16000.0) / edge;
        double env = 1.0;
        if (rel_in < 1.0) env *= 0.5 - 0.5 * std::cos(std::numbers::pi * std::max(0.0, rel_in));
        if (rel_out < 1.0)
          env *= 0.5 - 0.5 * std::cos(std::numbers::pi * std::max(0.0, rel_out));
        samples[s] = float(std::clamp(double(samples[s]) + env * v, -1.0, 1.0));
      }
    }

    condaudio::dsp::AudioBuffer audio{std::move(samples), 16000};
    condaudio::dsp::write_wav_pcm16(corpus.audio_dir / (id + ".wav"), audio);

    std::sort(events.begin(), events.end(), [](const FixtureEvent& a, const FixtureEvent& b) {
      return a.onset < b.onset;
    });
    for (const auto& e : events) {
      char row[160];
      std::snprintf(row, sizeof row, "%s\t%.3f\t%.3f\t%s\n", id.c_str(), e.onset, e.offset,
                    e.klass.c_str());
      labels << row;
    }

    std::string caption = "synthetic clip with";
    for (const auto& k : present) caption += " " + k;
    captions[id] = caption;
  }

  std::ofstream lf(corpus.labels_tsv, std::ios::binary);
  lf << labels.str();
  std::ofstream cf(corpus.captions_json, std::ios::binary);
  cf << captions.dump(2) << "\n";
  return corpus;
}

std::filesystem::path write_corrupt_wav(const std::filesystem::path& dir,
                                        const std::string& stem) {
  const auto path = dir / (stem + ".wav");
  std::ofstream out(path, std::ios::binary);
  out << "this is not audio";
  return path;
}

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("condaudio_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsupport
