#include "condaudio/acnd.hpp"

#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "condaudio/errors.hpp"

namespace condaudio::data {
namespace {

class Writer {
 public:
  void u16(std::uint16_t v) {
    buf_.push_back(char(v & 0xff));
    buf_.push_back(char((v >> 8) & 0xff));
  }
  void u8(std::uint8_t v) { buf_.push_back(char(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(char((v >> (8 * i)) & 0xff));
  }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u32(u);
  }
  void magic() { buf_ += "ACND"; }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out.write(buf_.data(), std::streamsize(buf_.size()));
    if (!out) throw DataError("write failed: " + path.string());
  }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path_);
    buf_.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }

  std::uint8_t u8() { return bytes(1)[0]; }
  std::uint16_t u16() {
    const auto* p = bytes(2);
    return std::uint16_t(p[0] | p[1] << 8);
  }
  std::uint32_t u32() {
    const auto* p = bytes(4);
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
  }
  float f32() {
    std::uint32_t u = u32();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }

  void expect_magic() {
    const auto* p = bytes(4);
    if (std::memcmp(p, "ACND", 4) != 0) throw FormatError("bad magic in " + path_);
  }

  void expect_end() const {
    if (pos_ != buf_.size()) throw FormatError("trailing bytes in " + path_);
  }

  AcndKind header(AcndKind expected_min, AcndKind expected_max) {
    expect_magic();
    const auto version = u16();
    if (version != kAcndVersion)
      throw FormatError("unsupported ACND version " + std::to_string(version) + " in " +
                        path_ + " (expected " + std::to_string(kAcndVersion) + ")");
    const auto kind = u8();
    u8();  // reserved
    if (kind < std::uint8_t(expected_min) || kind > std::uint8_t(expected_max))
      throw FormatError("unexpected ACND kind " + std::to_string(kind) + " in " + path_);
    return AcndKind(kind);
  }

 private:
  const unsigned char* bytes(std::size_t n) {
    if (pos_ + n > buf_.size()) throw FormatError("truncated file: " + path_);
    const auto* p = reinterpret_cast<const unsigned char*>(buf_.data()) + pos_;
    pos_ += n;
    return p;
  }

  std::string path_;
  std::string buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void write_contour(const std::filesystem::path& path, const dsp::Contour& contour,
                   AcndKind kind) {
  if (kind != AcndKind::pitch && kind != AcndKind::energy)
    throw std::invalid_argument("write_contour: kind must be pitch or energy");
  if (contour.voiced.size() != contour.values.size())
    throw std::invalid_argument("write_contour: voiced/value lengths differ");
  Writer w;
  w.magic();
  w.u16(kAcndVersion);
  w.u8(std::uint8_t(kind));
  w.u8(0);
  w.u32(std::uint32_t(contour.values.size()));
  w.f32(float(contour.frame_rate));
  for (float v : contour.values) w.f32(v);
  for (auto v : contour.voiced) w.f32(v ? 1.0f : 0.0f);
  w.save(path);
}

dsp::Contour read_contour(const std::filesystem::path& path, AcndKind* kind_out) {
  Reader r(path);
  const auto kind = r.header(AcndKind::pitch, AcndKind::energy);
  if (kind_out) *kind_out = kind;
  const auto n = r.u32();
  dsp::Contour c;
  c.frame_rate = r.f32();
  c.values.resize(n);
  c.voiced.resize(n);
  for (auto& v : c.values) v = r.f32();
  for (auto& v : c.voiced) v = r.f32() != 0.0f ? 1 : 0;
  r.expect_end();
  return c;
}

void write_grid(const std::filesystem::path& path, const conditions::TimestampGrid& grid) {
  Writer w;
  w.magic();
  w.u16(kAcndVersion);
  w.u8(std::uint8_t(AcndKind::grid));
  w.u8(0);
  w.u32(std::uint32_t(grid.grid.rows()));
  w.u32(std::uint32_t(grid.grid.cols()));
  w.f32(float(grid.frame_rate));
  for (double v : grid.grid.raw()) w.f32(float(v));
  w.save(path);
}

conditions::TimestampGrid read_grid(const std::filesystem::path& path) {
  Reader r(path);
  r.header(AcndKind::grid, AcndKind::grid);
  const auto rows = r.u32();
  const auto cols = r.u32();
  conditions::TimestampGrid g;
  g.frame_rate = r.f32();
  g.grid = Mat(rows, cols);
  for (double& v : g.grid.raw()) v = r.f32();
  r.expect_end();
  return g;
}

void write_matrix(const std::filesystem::path& path, const Mat& m) {
  Writer w;
  w.magic();
  w.u16(kAcndVersion);
  w.u8(std::uint8_t(AcndKind::object));
  w.u8(0);
  w.u32(std::uint32_t(m.rows()));
  w.u32(std::uint32_t(m.cols()));
  for (double v : m.raw()) w.f32(float(v));
  w.save(path);
}

Mat read_matrix(const std::filesystem::path& path) {
  Reader r(path);
  r.header(AcndKind::object, AcndKind::object);
  const auto rows = r.u32();
  const auto cols = r.u32();
  Mat m(rows, cols);
  for (double& v : m.raw()) v = r.f32();
  r.expect_end();
  return m;
}

}  // namespace condaudio::data
