#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace testsupport {

// Synthetic corpus on disk: audio/ with WAV clips, labels.tsv (strong
// labels), captions.json (id -> caption). Deterministic per seed.
struct FixtureCorpus {
  std::filesystem::path root;
  std::filesystem::path audio_dir;
  std::filesystem::path labels_tsv;
  std::filesystem::path captions_json;
  std::vector<std::string> ids;
};

FixtureCorpus make_fixture_corpus(const std::filesystem::path& dir, std::size_t n_clips,
                                  std::uint64_t seed);

// A file that is not a valid WAV.
std::filesystem::path write_corrupt_wav(const std::filesystem::path& dir,
                                        const std::string& stem);

// Fresh directory under the system temp root; removed and recreated.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace testsupport
