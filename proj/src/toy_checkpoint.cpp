#include "condaudio/toy_checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <string>

#include "condaudio/errors.hpp"

namespace condaudio::toy {
namespace {

void wr_u16(std::string& s, std::uint16_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char((v >> 8) & 0xff));
}

void wr_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

void wr_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

void wr_block(std::string& s, std::uint8_t tag, const std::string& name, const Mat& m) {
  s.push_back(char(tag));
  if (name.size() > 0xffff) throw std::logic_error("parameter name too long");
  wr_u16(s, std::uint16_t(name.size()));
  s += name;
  s.push_back(char(2));  // ndim
  wr_u32(s, std::uint32_t(m.rows()));
  wr_u32(s, std::uint32_t(m.cols()));
  for (double v : m.raw()) {
    const float f = float(v);
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    wr_u32(s, u);
  }
}

struct Cursor {
  const unsigned char* p;
  std::size_t n;
  std::size_t pos = 0;
  std::string path;

  const unsigned char* take(std::size_t k) {
    if (pos + k > n) throw FormatError("truncated checkpoint: " + path);
    const unsigned char* out = p + pos;
    pos += k;
    return out;
  }
  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto* q = take(2);
    return std::uint16_t(q[0] | q[1] << 8);
  }
  std::uint32_t u32() {
    const auto* q = take(4);
    return std::uint32_t(q[0]) | std::uint32_t(q[1]) << 8 | std::uint32_t(q[2]) << 16 |
           std::uint32_t(q[3]) << 24;
  }
  std::uint64_t u64() {
    std::uint64_t lo = u32(), hi = u32();
    return lo | (hi << 32);
  }
  float f32() {
    std::uint32_t u = u32();
    float v;
    std::memcpy(&v, &u, 4);
    return v;
  }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ToyModel& model) {
  std::string buf;
  buf += "ACKP";
  wr_u16(buf, kCheckpointVersion);
  wr_u64(buf, model.config.digest());
  wr_u32(buf, std::uint32_t(model.frozen.items().size() + model.trainable.items().size()));
  for (const auto& [name, m] : model.frozen.items()) wr_block(buf, 0, name, m);
  for (const auto& [name, m] : model.trainable.items()) wr_block(buf, 1, name, m);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint: " + path.string());
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

ToyModel load_checkpoint(const std::filesystem::path& path, const ToyConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Cursor c{reinterpret_cast<const unsigned char*>(buf.data()), buf.size(), 0, path.string()};
  if (std::memcmp(c.take(4), "ACKP", 4) != 0)
    throw FormatError("bad checkpoint magic: " + path.string());
  const auto version = c.u16();
  if (version != kCheckpointVersion)
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  const auto digest = c.u64();
  if (digest != config.digest())
    throw DataError("config digest mismatch: checkpoint was written with a different config");

  ToyModel model = ToyModel::init(config);
  const auto blocks = c.u32();
  for (std::uint32_t b = 0; b < blocks; ++b) {
    const auto tag = c.u8();
    const auto name_len = c.u16();
    std::string name(reinterpret_cast<const char*>(c.take(name_len)), name_len);
    const auto ndim = c.u8();
    if (ndim != 2) throw FormatError("unexpected block rank in " + path.string());
    const auto rows = c.u32();
    const auto cols = c.u32();
    ParamSet& set = tag == 0 ? model.frozen : model.trainable;
    if (!set.has(name))
      throw FormatError("checkpoint block does not exist in model: " + name);
    Mat& m = set.at(name);
    if (m.rows() != rows || m.cols() != cols)
      throw FormatError("checkpoint block shape mismatch for " + name);
    for (double& v : m.raw()) v = double(c.f32());
  }
  if (c.pos != c.n) throw FormatError("trailing bytes in checkpoint: " + path.string());
  return model;
}

}  // namespace condaudio::toy
