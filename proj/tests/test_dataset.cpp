#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "condaudio/acnd.hpp"
#include "condaudio/dataset.hpp"
#include "condaudio/errors.hpp"
#include "condaudio/rng.hpp"
#include "support/fixtures.hpp"

using namespace condaudio;
using namespace condaudio::data;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse_strong_labels") {
  SUBCASE("single row") {
    std::istringstream in("Y1\t1.0\t2.0\tDog\n");
    const auto labels = parse_strong_labels(in);
    CHECK(labels.errors.empty());
    REQUIRE(labels.by_clip.count("Y1"));
    REQUIRE(labels.by_clip.at("Y1").size() == 1);
    CHECK(labels.by_clip.at("Y1")[0].klass == "Dog");
    CHECK(labels.by_clip.at("Y1")[0].onset == doctest::Approx(1.0));
  }

  SUBCASE("header row is skipped") {
    std::istringstream in(
        "segment_id\tstart_time_seconds\tend_time_seconds\tlabel\nY1\t0.5\t1.5\tCat\n");
    const auto labels = parse_strong_labels(in);
    CHECK(labels.errors.empty());
    CHECK(labels.by_clip.size() == 1);
  }

  SUBCASE("empty file") {
    std::istringstream in("");
    const auto labels = parse_strong_labels(in);
    CHECK(labels.by_clip.empty());
    CHECK(labels.errors.empty());
  }

  SUBCASE("malformed rows are reported, not dropped silently") {
    std::istringstream in(
        "Y1\t1.0\t2.0\tDog\n"
        "Y1\t3.0\t4.0\tCat\n"
        "Y2\tnot_a_number\t4.0\tDog\n"   // unparsable time
        "Y2\t5.0\t4.0\tDog\n"            // onset >= offset
        "Y3\t0.0\t1.0\tBird\n");
    const auto labels = parse_strong_labels(in);
    std::size_t events = 0;
    for (const auto& [id, list] : labels.by_clip) events += list.size();
    CHECK(events == 3);
    REQUIRE(labels.errors.size() == 2);
    CHECK(labels.errors[0].line == 3);
    CHECK(labels.errors[1].line == 4);
  }

  SUBCASE("negative times are row errors") {
    std::istringstream in("Y1\t-1.0\t2.0\tDog\n");
    const auto labels = parse_strong_labels(in);
    CHECK(labels.by_clip.empty());
    REQUIRE(labels.errors.size() == 1);
  }
}

TEST_CASE("acnd contour round trip") {
  const auto dir = testsupport::temp_dir("acnd");
  Rng rng(42);
  dsp::Contour c;
  c.frame_rate = 100.0;
  for (int i = 0; i < 257; ++i) {
    c.values.push_back(float(rng.normal() * 200.0));
    c.voiced.push_back(rng.uniform() < 0.7 ? 1 : 0);
  }

  write_contour(dir / "x.acnd", c, AcndKind::pitch);
  AcndKind kind;
  const auto back = read_contour(dir / "x.acnd", &kind);
  CHECK(kind == AcndKind::pitch);
  CHECK(back.values == c.values);  // bitwise
  CHECK(back.voiced == c.voiced);
  CHECK(back.frame_rate == c.frame_rate);
}

TEST_CASE("acnd rejects truncated and wrong-version files") {
  const auto dir = testsupport::temp_dir("acnd_bad");
  dsp::Contour c;
  c.frame_rate = 100.0;
  c.values = {1.0f, 2.0f};
  c.voiced = {1, 1};
  write_contour(dir / "ok.acnd", c, AcndKind::energy);

  auto bytes = slurp(dir / "ok.acnd");

  {
    std::ofstream out(dir / "trunc.acnd", std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size() - 5));
  }
  CHECK_THROWS_AS(read_contour(dir / "trunc.acnd"), FormatError);

  {
    auto bad = bytes;
    bad[4] = char(999 & 0xff);  // version little-endian
    bad[5] = char(999 >> 8);
    std::ofstream out(dir / "v999.acnd", std::ios::binary);
    out.write(bad.data(), std::streamsize(bad.size()));
  }
  CHECK_THROWS_WITH(read_contour(dir / "v999.acnd"),
                    doctest::Contains("unsupported ACND version 999"));

  {
    auto bad = bytes;
    bad[0] = 'X';
    std::ofstream out(dir / "magic.acnd", std::ios::binary);
    out.write(bad.data(), std::streamsize(bad.size()));
  }
  CHECK_THROWS_AS(read_contour(dir / "magic.acnd"), FormatError);

  {
    auto bad = bytes + "zz";
    std::ofstream out(dir / "trail.acnd", std::ios::binary);
    out.write(bad.data(), std::streamsize(bad.size()));
  }
  CHECK_THROWS_AS(read_contour(dir / "trail.acnd"), FormatError);
}

TEST_CASE("acnd grid and matrix round trip") {
  const auto dir = testsupport::temp_dir("acnd_gm");
  conditions::TimestampGrid g;
  g.frame_rate = 100.0;
  g.grid = Mat::from_rows({{1, 0, 1}, {0, 1, 0}});
  write_grid(dir / "g.acnd", g);
  const auto gb = read_grid(dir / "g.acnd");
  CHECK(gb.grid == g.grid);
  CHECK(gb.frame_rate == g.frame_rate);

  Mat m = Mat::from_rows({{0.5, -1.25}, {3.0, 4.0}});
  write_matrix(dir / "m.acnd", m);
  CHECK(read_matrix(dir / "m.acnd") == m);
}

TEST_CASE("build_manifest on a 2-clip fixture") {
  const auto dir = testsupport::temp_dir("build2");
  const auto corpus = testsupport::make_fixture_corpus(dir / "corpus", 2, 11);
  const auto labels = parse_strong_labels_file(corpus.labels_tsv);
  const auto captions = read_caption_json(corpus.captions_json);

  DatasetConfig config;
  BuildReport report;
  const auto manifest =
      build_manifest(labels, captions, corpus.audio_dir, config, dir / "out", report);

  CHECK(manifest.records.size() == 2);
  CHECK(report.clips_built == 2);
  CHECK(manifest.config.frames() == 1000);
  CHECK(manifest.config.energy_max > manifest.config.energy_min);

  std::size_t contour_files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "out" / "contours"))
    if (e.is_regular_file()) ++contour_files;
  CHECK(contour_files == 4);  // pitch + energy per clip

  for (const auto& rec : manifest.records) {
    const auto pitch = read_contour(dir / "out" / rec.pitch_ref);
    const auto energy = read_contour(dir / "out" / rec.energy_ref);
    CHECK(pitch.frames() == manifest.config.frames());
    CHECK(energy.frames() == manifest.config.frames());
    for (const auto& e : rec.events) CHECK(e.offset <= config.clip_seconds + 1e-9);
  }
}

TEST_CASE("build_manifest exclusions") {
  const auto dir = testsupport::temp_dir("build_excl");
  const auto corpus = testsupport::make_fixture_corpus(dir / "corpus", 3, 13);
  const auto labels = parse_strong_labels_file(corpus.labels_tsv);

  SUBCASE("empty caption map excludes everything") {
    DatasetConfig config;
    BuildReport report;
    const auto manifest =
        build_manifest(labels, {}, corpus.audio_dir, config, dir / "out_a", report);
    CHECK(manifest.records.empty());
    CHECK(report.excluded.size() == labels.by_clip.size());
    for (const auto& e : report.excluded) CHECK(e.reason == "missing caption");
  }

  SUBCASE("missing audio is excluded with a reason") {
    auto captions = read_caption_json(corpus.captions_json);
    std::filesystem::remove(corpus.audio_dir / (corpus.ids[0] + ".wav"));
    DatasetConfig config;
    BuildReport report;
    const auto manifest =
        build_manifest(labels, captions, corpus.audio_dir, config, dir / "out_b", report);
    CHECK(manifest.records.size() == 2);
    REQUIRE(report.excluded.size() == 1);
    CHECK(report.excluded[0].id == corpus.ids[0]);
  }
}

TEST_CASE("build_manifest is deterministic") {
  const auto dir = testsupport::temp_dir("build_det");
  const auto corpus = testsupport::make_fixture_corpus(dir / "corpus", 3, 17);
  const auto labels = parse_strong_labels_file(corpus.labels_tsv);
  const auto captions = read_caption_json(corpus.captions_json);

  for (const char* out : {"out1", "out2"}) {
    DatasetConfig config;
    BuildReport report;
    const auto manifest =
        build_manifest(labels, captions, corpus.audio_dir, config, dir / out, report);
    write_manifest(dir / out / "manifest.jsonl", manifest);
    std::ofstream rep(dir / out / "build-report.json", std::ios::binary);
    rep << report.to_json();
  }

  CHECK(slurp(dir / "out1" / "manifest.jsonl") == slurp(dir / "out2" / "manifest.jsonl"));
  CHECK(slurp(dir / "out1" / "build-report.json") == slurp(dir / "out2" / "build-report.json"));
  for (const auto& e : std::filesystem::directory_iterator(dir / "out1" / "contours")) {
    const auto name = e.path().filename();
    CHECK(slurp(e.path()) == slurp(dir / "out2" / "contours" / name));
  }
}

TEST_CASE("manifest read/write round trip") {
  const auto dir = testsupport::temp_dir("manifest_rt");
  Manifest manifest;
  manifest.config.classes = {"dog", "speech"};
  manifest.config.energy_max = 12.5f;
  manifest.records.push_back({"clip0", "audio/clip0.wav", "a dog", {{"dog", 1.0, 2.0}},
                              "contours/clip0.pitch.acnd", "contours/clip0.energy.acnd",
                              "train"});
  write_manifest(dir / "m.jsonl", manifest);
  const auto back = read_manifest(dir / "m.jsonl");
  CHECK(back.config.digest() == manifest.config.digest());
  REQUIRE(back.records.size() == 1);
  CHECK(back.records[0].id == "clip0");
  CHECK(back.records[0].split == "train");
  REQUIRE(back.records[0].events.size() == 1);
  CHECK(back.records[0].events[0].klass == "dog");
}

TEST_CASE("split_manifest") {
  Manifest manifest;
  manifest.config.classes = {"dog", "speech"};
  for (int i = 0; i < 10; ++i) {
    ClipRecord rec;
    rec.id = "clip" + std::to_string(i);
    rec.events.push_back({i % 2 == 0 ? "dog" : "speech", 0.0, 1.0});
    manifest.records.push_back(rec);
  }

  SUBCASE("counts 8/1/1 partition disjointly") {
    split_manifest(manifest, 8, 1, 1, 7);
    std::map<std::string, int> counts;
    for (const auto& r : manifest.records) counts[r.split]++;
    CHECK(counts["train"] == 8);
    CHECK(counts["valid"] == 1);
    CHECK(counts["test"] == 1);
    CHECK(counts.count("unassigned") == 0);
  }

  SUBCASE("same seed gives the same assignment") {
    auto a = manifest, b = manifest;
    split_manifest(a, 6, 2, 2, 1234);
    split_manifest(b, 6, 2, 2, 1234);
    for (std::size_t i = 0; i < a.records.size(); ++i)
      CHECK(a.records[i].split == b.records[i].split);

    auto c = manifest;
    split_manifest(c, 6, 2, 2, 999);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.records.size(); ++i)
      any_diff = any_diff || a.records[i].split != c.records[i].split;
    CHECK(any_diff);
  }

  SUBCASE("allowlist restricts the test split") {
    split_manifest(manifest, 4, 1, 3, 7, {"dog"});
    for (const auto& r : manifest.records)
      if (r.split == "test") {
        bool has_dog = false;
        for (const auto& e : r.events) has_dog = has_dog || e.klass == "dog";
        CHECK(has_dog);
      }
  }

  SUBCASE("split is a partition of the ids") {
    split_manifest(manifest, 5, 2, 2, 7);
    std::set<std::string> seen;
    for (const auto& r : manifest.records) {
      CHECK((r.split == "train" || r.split == "valid" || r.split == "test" ||
             r.split == "unused"));
      CHECK(seen.insert(r.id).second);
    }
    CHECK(seen.size() == 10);
  }

  SUBCASE("excessive counts are rejected") {
    CHECK_THROWS_AS(split_manifest(manifest, 9, 1, 1, 7), DataError);
    // only 5 clips contain "dog": a 6-clip allowlisted test split must fail
    CHECK_THROWS_AS(split_manifest(manifest, 3, 1, 6, 7, {"dog"}), DataError);
  }
}

TEST_CASE("dataset config digest is sensitive to every field") {
  DatasetConfig a;
  a.classes = {"dog"};
  DatasetConfig b = a;
  CHECK(a.digest() == b.digest());
  b.hop = 320;
  CHECK(a.digest() != b.digest());
  b = a;
  b.classes = {"dog", "cat"};
  CHECK(a.digest() != b.digest());
  b = a;
  b.energy_max = 3.0f;
  CHECK(a.digest() != b.digest());

  const auto round = DatasetConfig::from_json(a.to_json());
  CHECK(round.digest() == a.digest());
}
