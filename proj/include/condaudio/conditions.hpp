#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "condaudio/dsp.hpp"
#include "condaudio/mat.hpp"

namespace condaudio::conditions {

struct Event {
  std::string klass;
  double onset = 0.0;   // seconds
  double offset = 0.0;  // seconds
};

using EventList = std::vector<Event>;

// Ordered set of sound-event class names. The ordering is part of the dataset
// configuration and must stay stable once persisted.
class EventSet {
 public:
  EventSet() = default;
  explicit EventSet(std::vector<std::string> classes);

  std::size_t size() const { return classes_.size(); }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::string& name(std::size_t d) const { return classes_[d]; }
  // -1 when the class is unknown.
  long long index_of(const std::string& name) const;

 private:
  std::vector<std::string> classes_;
};

// D x L binary matrix; grid(d, l) == 1 iff class d sounds at frame l.
struct TimestampGrid {
  Mat grid;
  double frame_rate = 0.0;
};

struct LabelEmbedding {
  Mat matrix;  // D x H
};

struct ClassObject {
  Mat matrix;  // L x H
};

// Maps a class name to a fixed semantic vector. Implementations must be
// deterministic: the same name always yields the same vector.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(const std::string& class_name) const = 0;
  virtual std::size_t dim() const = 0;
};

// Seeded hash-derived unit vectors; the stand-in for a language-model encoder.
class PseudoEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit PseudoEmbeddingProvider(std::size_t dim = 64, std::uint64_t seed = 0x5eed);
  std::vector<double> embed(const std::string& class_name) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Loads "name v1 v2 ... vE" lines. Unknown names raise DataError.
class FileEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit FileEmbeddingProvider(const std::filesystem::path& path);
  std::vector<double> embed(const std::string& class_name) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::map<std::string, std::vector<double>> vectors_;
  std::size_t dim_ = 0;
};

// Frame-center membership: grid(d, l) = 1 iff l/frame_rate lies in
// [onset, offset) of some event of class d. Overlapping same-class events
// merge into one run.
TimestampGrid events_to_grid(const EventList& events, const EventSet& set, double frame_rate,
                             std::size_t frames);

// Maximal runs of ones back to (class, onset, offset) triples, ordered by
// class index then onset.
EventList grid_to_events(const TimestampGrid& grid, const EventSet& set);

// Row d = provider(class_d) * projection. The projection is the per-class
// linear map standing in for a 1x1 convolution over class embeddings.
LabelEmbedding embed_labels(const EventSet& set, const EmbeddingProvider& provider,
                            const Mat& projection);

// object[l, h] = sum_d label[d, h] * grid[d, l]  (i.e. grid^T * label)
ClassObject class_object(const LabelEmbedding& label, const TimestampGrid& grid);

// Lift conditions to the common L x H representation. A class object passes
// through unchanged; a quantized contour indexes a per-bin embedding table.
Mat standardize(const ClassObject& object, std::size_t expected_frames);
Mat standardize(const dsp::QuantizedContour& q, const Mat& bin_table,
                std::size_t expected_frames);

// JSON (de)serialization as an array of {"class", "onset", "offset"}.
std::string events_to_json(const EventList& events);
EventList events_from_json(const std::string& json_text);

}  // namespace condaudio::conditions
