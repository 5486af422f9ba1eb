#include "condaudio/conditions.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "condaudio/errors.hpp"
#include "condaudio/rng.hpp"

namespace condaudio::conditions {

EventSet::EventSet(std::vector<std::string> classes) : classes_(std::move(classes)) {
  if (classes_.empty()) throw std::invalid_argument("event set must not be empty");
  std::set<std::string> seen;
  for (const auto& c : classes_)
    if (!seen.insert(c).second)
      throw std::invalid_argument("duplicate class in event set: " + c);
}

long long EventSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i] == name) return (long long)i;
  return -1;
}

PseudoEmbeddingProvider::PseudoEmbeddingProvider(std::size_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::vector<double> PseudoEmbeddingProvider::embed(const std::string& class_name) const {
  Rng rng(mix64(seed_ ^ fnv1a64(class_name)));
  std::vector<double> v(dim_);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  if (norm < 1e-12) {
    v[0] = 1.0;
    return v;
  }
  for (auto& x : v) x /= norm;
  return v;
}

FileEmbeddingProvider::FileEmbeddingProvider(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string name;
    ss >> name;
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (v.empty())
      throw DataError("embedding file line " + std::to_string(line_no) + ": no values");
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_)
      throw DataError("embedding file line " + std::to_string(line_no) +
                      ": inconsistent dimension");
    vectors_[name] = std::move(v);
  }
  if (vectors_.empty()) throw DataError("embedding file is empty: " + path.string());
}

std::vector<double> FileEmbeddingProvider::embed(const std::string& class_name) const {
  auto it = vectors_.find(class_name);
  if (it == vectors_.end())
    throw DataError("no embedding for class: " + class_name);
  return it->second;
}

TimestampGrid events_to_grid(const EventList& events, const EventSet& set, double frame_rate,
                             std::size_t frames) {
  if (frame_rate <= 0.0) throw std::invalid_argument("frame_rate must be positive");
  const double clip_len = double(frames) / frame_rate;
  TimestampGrid out;
  out.frame_rate = frame_rate;
  out.grid = Mat(set.size(), frames);
  for (const auto& e : events) {
    const long long d = set.index_of(e.klass);
    if (d < 0) throw DataError("unknown event class: " + e.klass);
    if (!(e.onset >= 0.0 && e.onset < e.offset))
      throw DataError("invalid event times for class " + e.klass + ": onset " +
                      std::to_string(e.onset) + ", offset " + std::to_string(e.offset));
    if (e.offset > clip_len + 1e-9)
      throw DataError("event extends past clip end: " + e.klass);
    for (std::size_t l = 0; l < frames; ++l) {
      const double t = double(l) / frame_rate;
      if (t >= e.onset && t < e.offset) out.grid(std::size_t(d), l) = 1.0;
    }
  }
  return out;
}

EventList grid_to_events(const TimestampGrid& grid, const EventSet& set) {
  if (grid.grid.rows() != set.size())
    throw std::invalid_argument("grid rows do not match event set size");
  EventList out;
  for (std::size_t d = 0; d < grid.grid.rows(); ++d) {
    std::size_t l = 0;
    while (l < grid.grid.cols()) {
      const double v = grid.grid(d, l);
      if (v != 0.0 && v != 1.0) throw DataError("grid entries must be 0 or 1");
      if (v == 1.0) {
        std::size_t end = l;
        while (end + 1 < grid.grid.cols() && grid.grid(d, end + 1) == 1.0) ++end;
        out.push_back({set.name(d), double(l) / grid.frame_rate,
                       double(end + 1) / grid.frame_rate});
        l = end + 1;
      } else {
        ++l;
      }
    }
  }
  return out;
}

LabelEmbedding embed_labels(const EventSet& set, const EmbeddingProvider& provider,
                            const Mat& projection) {
  if (projection.rows() != provider.dim())
    throw std::invalid_argument("projection rows must equal provider dimension");
  if (!all_finite(projection)) throw std::invalid_argument("projection must be finite");
  Mat raw(set.size(), provider.dim());
  for (std::size_t d = 0; d < set.size(); ++d) {
    const auto v = provider.embed(set.name(d));
    if (v.size() != provider.dim())
      throw DataError("provider returned wrong dimension for class " + set.name(d));
    for (std::size_t e = 0; e < v.size(); ++e) raw(d, e) = v[e];
  }
  return {matmul(raw, projection)};
}

ClassObject class_object(const LabelEmbedding& label, const TimestampGrid& grid) {
  if (label.matrix.rows() != grid.grid.rows())
    throw std::invalid_argument("label and grid disagree on class count");
  return {matmul(transpose(grid.grid), label.matrix)};
}

Mat standardize(const ClassObject& object, std::size_t expected_frames) {
  if (object.matrix.rows() != expected_frames)
    throw DataError("class object frame count " + std::to_string(object.matrix.rows()) +
                    " does not match configured " + std::to_string(expected_frames));
  return object.matrix;
}

Mat standardize(const dsp::QuantizedContour& q, const Mat& bin_table,
                std::size_t expected_frames) {
  if (q.indices.size() != expected_frames)
    throw DataError("contour frame count " + std::to_string(q.indices.size()) +
                    " does not match configured " + std::to_string(expected_frames));
  Mat out(q.indices.size(), bin_table.cols());
  for (std::size_t l = 0; l < q.indices.size(); ++l) {
    const int b = q.indices[l];
    if (b < 0 || std::size_t(b) >= bin_table.rows())
      throw DataError("bin index out of table range: " + std::to_string(b));
    for (std::size_t h = 0; h < bin_table.cols(); ++h) out(l, h) = bin_table(std::size_t(b), h);
  }
  return out;
}

std::string events_to_json(const EventList& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : events)
    arr.push_back({{"class", e.klass}, {"onset", e.onset}, {"offset", e.offset}});
  return arr.dump();
}

EventList events_from_json(const std::string& json_text) {
  EventList out;
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad event JSON: ") + e.what());
  }
  if (!arr.is_array()) throw DataError("event JSON must be an array");
  for (const auto& item : arr) {
    Event e;
    e.klass = item.at("class").get<std::string>();
    e.onset = item.at("onset").get<double>();
    e.offset = item.at("offset").get<double>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace condaudio::conditions
