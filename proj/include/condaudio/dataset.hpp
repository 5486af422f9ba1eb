#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "condaudio/conditions.hpp"

namespace condaudio::data {

// Extraction configuration shared by dataset building and evaluation. The
// digest pins every value that affects extracted conditions, so downstream
// consumers can detect mismatched artifacts.
struct DatasetConfig {
  int sample_rate = 16000;
  std::size_t window = 1024;
  std::size_t hop = 160;
  double clip_seconds = 10.0;
  int pitch_bins = 256;
  int energy_bins = 256;
  float pitch_min = 40.0f;
  float pitch_max = 1600.0f;
  float energy_min = 1e-4f;
  float energy_max = 0.0f;  // filled at build time from the corpus
  std::vector<std::string> classes;

  std::size_t frames() const;
  double frame_rate() const { return double(sample_rate) / double(hop); }
  std::string canonical_text() const;
  std::uint64_t digest() const;

  std::string to_json() const;
  static DatasetConfig from_json(const std::string& text);
};

struct ClipRecord {
  std::string id;
  std::string audio_path;
  std::string caption;
  conditions::EventList events;
  std::string pitch_ref;   // path to serialized pitch contour
  std::string energy_ref;  // path to serialized energy contour
  std::string split = "unassigned";
};

struct Manifest {
  DatasetConfig config;
  std::vector<ClipRecord> records;
};

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct StrongLabels {
  std::map<std::string, conditions::EventList> by_clip;
  std::vector<RowError> errors;
};

// AudioSet-strong style TSV: optional header
// "segment_id\tstart_time_seconds\tend_time_seconds\tlabel", then 4-column
// rows. Malformed rows land in `errors`, never silently vanish.
StrongLabels parse_strong_labels(std::istream& in);
StrongLabels parse_strong_labels_file(const std::filesystem::path& path);

struct Exclusion {
  std::string id;
  std::string reason;
};

struct BuildReport {
  std::size_t clips_in = 0;
  std::size_t clips_built = 0;
  std::vector<Exclusion> excluded;
  std::vector<RowError> label_errors;
  float energy_max = 0.0f;

  std::string to_json() const;
};

// Runs condition extraction per clip and writes contour binaries under
// out_dir/contours. Clips without caption or readable audio are excluded with
// a logged reason. Deterministic: identical inputs yield identical bytes.
Manifest build_manifest(const StrongLabels& labels,
                        const std::map<std::string, std::string>& captions,
                        const std::filesystem::path& audio_dir, DatasetConfig config,
                        const std::filesystem::path& out_dir, BuildReport& report);

// Seeded shuffle then partition into train/valid/test; records beyond the
// requested counts are marked "unused". With a non-empty allowlist, only
// clips containing at least one allowlisted class are eligible for test.
void split_manifest(Manifest& manifest, std::size_t train_n, std::size_t valid_n,
                    std::size_t test_n, std::uint64_t seed,
                    const std::vector<std::string>& test_allowlist = {});

void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
Manifest read_manifest(const std::filesystem::path& path);

std::map<std::string, std::string> read_caption_json(const std::filesystem::path& path);

}  // namespace condaudio::data
