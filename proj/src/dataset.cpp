#include "condaudio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "condaudio/acnd.hpp"
#include "condaudio/errors.hpp"
#include "condaudio/rng.hpp"

namespace condaudio::data {
namespace {

using nlohmann::json;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size() && std::isfinite(out);
  } catch (...) {
    return false;
  }
}

json record_to_json(const ClipRecord& rec) {
  json events = json::array();
  for (const auto& e : rec.events)
    events.push_back({{"class", e.klass}, {"onset", e.onset}, {"offset", e.offset}});
  return json{{"type", "record"},   {"id", rec.id},
              {"audio", rec.audio_path}, {"caption", rec.caption},
              {"events", events},   {"pitch", rec.pitch_ref},
              {"energy", rec.energy_ref}, {"split", rec.split}};
}

ClipRecord record_from_json(const json& j) {
  ClipRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.audio_path = j.at("audio").get<std::string>();
  rec.caption = j.at("caption").get<std::string>();
  rec.pitch_ref = j.at("pitch").get<std::string>();
  rec.energy_ref = j.at("energy").get<std::string>();
  rec.split = j.at("split").get<std::string>();
  for (const auto& e : j.at("events")) {
    rec.events.push_back({e.at("class").get<std::string>(), e.at("onset").get<double>(),
                          e.at("offset").get<double>()});
  }
  return rec;
}

}  // namespace

std::size_t DatasetConfig::frames() const {
  const auto samples = std::size_t(std::llround(clip_seconds * sample_rate));
  return (samples + hop - 1) / hop;
}

std::string DatasetConfig::canonical_text() const {
  std::ostringstream ss;
  ss << "sample_rate=" << sample_rate << "\nwindow=" << window << "\nhop=" << hop
     << "\nclip_seconds=" << clip_seconds << "\npitch_bins=" << pitch_bins
     << "\nenergy_bins=" << energy_bins << "\npitch_min=" << pitch_min
     << "\npitch_max=" << pitch_max << "\nenergy_min=" << energy_min
     << "\nenergy_max=" << energy_max << "\nclasses=";
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (i) ss << ",";
    ss << classes[i];
  }
  ss << "\n";
  return ss.str();
}

std::uint64_t DatasetConfig::digest() const { return fnv1a64(canonical_text()); }

std::string DatasetConfig::to_json() const {
  json j{{"sample_rate", sample_rate}, {"window", window},
         {"hop", hop},                 {"clip_seconds", clip_seconds},
         {"pitch_bins", pitch_bins},   {"energy_bins", energy_bins},
         {"pitch_min", pitch_min},     {"pitch_max", pitch_max},
         {"energy_min", energy_min},   {"energy_max", energy_max},
         {"classes", classes}};
  return j.dump();
}

DatasetConfig DatasetConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("bad dataset config JSON: ") + e.what());
  }
  DatasetConfig c;
  c.sample_rate = j.at("sample_rate").get<int>();
  c.window = j.at("window").get<std::size_t>();
  c.hop = j.at("hop").get<std::size_t>();
  c.clip_seconds = j.at("clip_seconds").get<double>();
  c.pitch_bins = j.at("pitch_bins").get<int>();
  c.energy_bins = j.at("energy_bins").get<int>();
  c.pitch_min = j.at("pitch_min").get<float>();
  c.pitch_max = j.at("pitch_max").get<float>();
  c.energy_min = j.at("energy_min").get<float>();
  c.energy_max = j.at("energy_max").get<float>();
  c.classes = j.at("classes").get<std::vector<std::string>>();
  return c;
}

StrongLabels parse_strong_labels(std::istream& in) {
  StrongLabels out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split_tabs(line);
    if (first) {
      first = false;
      if (cols.size() >= 4 && cols[0] == "segment_id") continue;  // header row
    }
    if (cols.size() != 4) {
      out.errors.push_back({line_no, "expected 4 tab-separated columns, got " +
                                         std::to_string(cols.size())});
      continue;
    }
    double onset = 0.0, offset = 0.0;
    if (!parse_double(cols[1], onset) || !parse_double(cols[2], offset)) {
      out.errors.push_back({line_no, "unparsable time value"});
      continue;
    }
    if (onset < 0.0 || offset < 0.0) {
      out.errors.push_back({line_no, "negative time"});
      continue;
    }
    if (onset >= offset) {
      out.errors.push_back({line_no, "onset >= offset"});
      continue;
    }
    if (cols[0].empty() || cols[3].empty()) {
      out.errors.push_back({line_no, "empty id or class"});
      continue;
    }
    out.by_clip[cols[0]].push_back({cols[3], onset, offset});
  }
  return out;
}

StrongLabels parse_strong_labels_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels file: " + path.string());
  return parse_strong_labels(in);
}

std::string BuildReport::to_json() const {
  json ex = json::array();
  for (const auto& e : excluded) ex.push_back({{"id", e.id}, {"reason", e.reason}});
  json errs = json::array();
  for (const auto& e : label_errors)
    errs.push_back({{"line", e.line}, {"message", e.message}});
  json j{{"clips_in", clips_in},
         {"clips_built", clips_built},
         {"excluded", ex},
         {"label_errors", errs},
         {"energy_max", energy_max}};
  return j.dump(2) + "\n";
}

Manifest build_manifest(const StrongLabels& labels,
                        const std::map<std::string, std::string>& captions,
                        const std::filesystem::path& audio_dir, DatasetConfig config,
                        const std::filesystem::path& out_dir, BuildReport& report) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir / "contours");

  report = BuildReport{};
  report.label_errors = labels.errors;
  report.clips_in = labels.by_clip.size();

  // Event set: explicit from config, otherwise collected from the labels.
  if (config.classes.empty()) {
    std::set<std::string> names;
    for (const auto& [id, events] : labels.by_clip)
      for (const auto& e : events) names.insert(e.klass);
    config.classes.assign(names.begin(), names.end());
  }
  const std::set<std::string> known(config.classes.begin(), config.classes.end());

  struct Built {
    ClipRecord record;
    dsp::Contour pitch;
    dsp::Contour energy;
  };
  std::vector<Built> built;

  for (const auto& [id, events] : labels.by_clip) {  // std::map: sorted by id
    const auto cap = captions.find(id);
    if (cap == captions.end()) {
      report.excluded.push_back({id, "missing caption"});
      continue;
    }
    const fs::path wav_path = audio_dir / (id + ".wav");
    dsp::AudioBuffer audio;
    try {
      audio = dsp::load_audio_16k(wav_path);
      if (audio.samples.empty()) throw DataError("empty audio");
      audio = dsp::fit_duration(audio, config.clip_seconds);
    } catch (const std::exception& e) {
      report.excluded.push_back({id, std::string("audio unreadable: ") + e.what()});
      continue;
    }

    bool bad_class = false;
    conditions::EventList clamped;
    for (auto e : events) {
      if (!known.count(e.klass)) {
        report.excluded.push_back({id, "unknown event class: " + e.klass});
        bad_class = true;
        break;
      }
      e.onset = std::min(e.onset, config.clip_seconds);
      e.offset = std::min(e.offset, config.clip_seconds);
      if (e.onset < e.offset) clamped.push_back(e);
    }
    if (bad_class) continue;

    Built b;
    b.record.id = id;
    b.record.audio_path = wav_path.string();
    b.record.caption = cap->second;
    b.record.events = std::move(clamped);
    b.pitch = dsp::estimate_f0(audio, {config.pitch_min, config.pitch_max, config.hop, 0.3});
    b.energy = dsp::frame_energy(dsp::stft(audio, config.window, config.hop));
    if (b.pitch.frames() != config.frames() || b.energy.frames() != config.frames())
      throw DataError("extracted contour length does not match configured frame count for " +
                      id);
    b.record.pitch_ref = (fs::path("contours") / (id + ".pitch.acnd")).string();
    b.record.energy_ref = (fs::path("contours") / (id + ".energy.acnd")).string();
    built.push_back(std::move(b));
  }

  float energy_max = 0.0f;
  for (const auto& b : built)
    for (float v : b.energy.values) energy_max = std::max(energy_max, v);
  config.energy_max = energy_max > config.energy_min ? energy_max : config.energy_min * 10.0f;

  Manifest manifest;
  manifest.config = config;
  for (auto& b : built) {
    write_contour(out_dir / b.record.pitch_ref, b.pitch, AcndKind::pitch);
    write_contour(out_dir / b.record.energy_ref, b.energy, AcndKind::energy);
    manifest.records.push_back(std::move(b.record));
  }
  report.clips_built = manifest.records.size();
  report.energy_max = config.energy_max;
  return manifest;
}

void split_manifest(Manifest& manifest, std::size_t train_n, std::size_t valid_n,
                    std::size_t test_n, std::uint64_t seed,
                    const std::vector<std::string>& test_allowlist) {
  const std::size_t n = manifest.records.size();
  if (train_n + valid_n + test_n > n)
    throw DataError("split counts exceed record count (" + std::to_string(n) + ")");

  // Seeded Fisher-Yates; avoids std::shuffle so the assignment is identical
  // across standard libraries.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng = Rng(seed).stream("dataset/split");
  for (std::size_t i = n; i > 1; --i) {
    const auto j = std::size_t(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }

  const std::set<std::string> allow(test_allowlist.begin(), test_allowlist.end());
  auto eligible = [&](const ClipRecord& rec) {
    if (allow.empty()) return true;
    for (const auto& e : rec.events)
      if (allow.count(e.klass)) return true;
    return false;
  };

  for (auto& rec : manifest.records) rec.split = "unused";

  std::vector<std::size_t> remaining;
  std::size_t assigned_test = 0;
  for (std::size_t idx : order) {
    if (assigned_test < test_n && eligible(manifest.records[idx])) {
      manifest.records[idx].split = "test";
      ++assigned_test;
    } else {
      remaining.push_back(idx);
    }
  }
  if (assigned_test < test_n)
    throw DataError("not enough allowlist-eligible clips for the test split (" +
                    std::to_string(assigned_test) + " of " + std::to_string(test_n) + ")");

  std::size_t pos = 0;
  for (; pos < valid_n; ++pos) manifest.records[remaining[pos]].split = "valid";
  for (std::size_t i = 0; i < train_n; ++i, ++pos)
    manifest.records[remaining[pos]].split = "train";
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  json header{{"type", "header"},
              {"config", json::parse(manifest.config.to_json())},
              {"digest", manifest.config.digest()}};
  out << header.dump() << "\n";
  std::vector<const ClipRecord*> ordered;
  for (const auto& r : manifest.records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const ClipRecord* a, const ClipRecord* b) { return a->id < b->id; });
  for (const auto* r : ordered) out << record_to_json(*r).dump() << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  Manifest manifest;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    const auto type = j.at("type").get<std::string>();
    if (type == "header") {
      if (have_header) throw DataError("duplicate manifest header");
      manifest.config = DatasetConfig::from_json(j.at("config").dump());
      if (j.at("digest").get<std::uint64_t>() != manifest.config.digest())
        throw DataError("manifest digest does not match its config");
      have_header = true;
    } else if (type == "record") {
      auto rec = record_from_json(j);
      if (!ids.insert(rec.id).second) throw DataError("duplicate record id: " + rec.id);
      manifest.records.push_back(std::move(rec));
    } else {
      throw DataError("manifest line " + std::to_string(line_no) + ": unknown type " + type);
    }
  }
  if (!have_header) throw DataError("manifest has no header line");
  return manifest;
}

std::map<std::string, std::string> read_caption_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open caption file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad caption JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError("caption JSON must map clip id to caption");
  std::map<std::string, std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<std::string>();
  return out;
}

}  // namespace condaudio::data
