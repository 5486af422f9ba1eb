#include "condaudio/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>

#include "condaudio/errors.hpp"

namespace condaudio::dsp {
namespace {

std::uint32_t rd_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
         std::uint32_t(p[3]) << 24;
}

std::uint16_t rd_u16(const unsigned char* p) {
  return std::uint16_t(p[0] | p[1] << 8);
}

void wr_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

void wr_u16(std::string& s, std::uint16_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char((v >> 8) & 0xff));
}

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               std::uint16_t format, std::uint16_t bits) {
  std::string data;
  if (format == 1) {
    data.reserve(audio.samples.size() * 2);
    for (float s : audio.samples) {
      double x = std::clamp(double(s), -1.0, 1.0);
      auto q = std::int16_t(std::lrint(x * 32767.0));
      wr_u16(data, std::uint16_t(q));
    }
  } else {
    data.reserve(audio.samples.size() * 4);
    for (float s : audio.samples) {
      std::uint32_t u;
      static_assert(sizeof(float) == 4);
      std::memcpy(&u, &s, 4);
      wr_u32(data, u);
    }
  }

  std::string out;
  const std::uint16_t channels = 1;
  const std::uint32_t byte_rate = std::uint32_t(audio.sample_rate) * channels * bits / 8;
  out += "RIFF";
  wr_u32(out, std::uint32_t(4 + 8 + 16 + 8 + data.size()));
  out += "WAVEfmt ";
  wr_u32(out, 16);
  wr_u16(out, format);
  wr_u16(out, channels);
  wr_u32(out, std::uint32_t(audio.sample_rate));
  wr_u32(out, byte_rate);
  wr_u16(out, std::uint16_t(channels * bits / 8));
  wr_u16(out, bits);
  out += "data";
  wr_u32(out, std::uint32_t(data.size()));
  out += data;

  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write file: " + path.string());
  f.write(out.data(), std::streamsize(out.size()));
}

}  // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    std::uint32_t size = rd_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size())
      throw FormatError("truncated chunk in WAV file: " + path.string());
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("short fmt chunk: " + path.string());
      format = rd_u16(bytes.data() + pos);
      channels = rd_u16(bytes.data() + pos + 2);
      sample_rate = rd_u32(bytes.data() + pos + 4);
      bits = rd_u16(bytes.data() + pos + 14);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data == nullptr)
    throw FormatError("missing fmt or data chunk: " + path.string());
  if (channels == 0 || sample_rate < 8000)
    throw FormatError("unsupported WAV header (channels=" + std::to_string(channels) +
                      ", rate=" + std::to_string(sample_rate) + "): " + path.string());

  const bool pcm16 = format == 1 && bits == 16;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !f32)
    throw FormatError("unsupported WAV encoding (format=" + std::to_string(format) +
                      ", bits=" + std::to_string(bits) + "): " + path.string());

  const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = data_size / frame_bytes;

  AudioBuffer out;
  out.sample_rate = int(sample_rate);
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + i * frame_bytes + c * bytes_per_sample;
      if (pcm16) {
        auto v = std::int16_t(rd_u16(p));
        acc += double(v) / 32768.0;
      } else {
        float v;
        std::uint32_t u = rd_u32(p);
        std::memcpy(&v, &u, 4);
        if (!std::isfinite(v))
          throw FormatError("non-finite sample in WAV file: " + path.string());
        acc += double(v);
      }
    }
    out.samples[i] = float(acc / channels);
  }
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path, const AudioBuffer& audio) {
  write_wav(path, audio, 1, 16);
}

void write_wav_f32(const std::filesystem::path& path, const AudioBuffer& audio) {
  write_wav(path, audio, 3, 32);
}

AudioBuffer resample_linear(const AudioBuffer& audio, int target_rate) {
  if (target_rate <= 0) throw std::invalid_argument("resample: bad target rate");
  if (audio.sample_rate == target_rate || audio.samples.empty()) {
    AudioBuffer out = audio;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = double(audio.sample_rate) / target_rate;
  const std::size_t n_out =
      std::size_t(std::floor(double(audio.samples.size() - 1) / ratio)) + 1;
  AudioBuffer out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t = i * ratio;
    const auto i0 = std::size_t(t);
    const double frac = t - double(i0);
    const std::size_t i1 = std::min(i0 + 1, audio.samples.size() - 1);
    out.samples[i] = float((1.0 - frac) * audio.samples[i0] + frac * audio.samples[i1]);
  }
  return out;
}

AudioBuffer load_audio_16k(const std::filesystem::path& path) {
  AudioBuffer audio = read_wav(path);
  if (audio.sample_rate != 16000) {
    std::cerr << "warning: resampling " << path.string() << " from " << audio.sample_rate
              << " Hz to 16000 Hz\n";
    audio = resample_linear(audio, 16000);
  }
  return audio;
}

AudioBuffer fit_duration(const AudioBuffer& audio, double seconds) {
  const auto target = std::size_t(std::llround(seconds * audio.sample_rate));
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  if (audio.samples.size() >= target) {
    const std::size_t start = (audio.samples.size() - target) / 2;
    out.samples.assign(audio.samples.begin() + std::ptrdiff_t(start),
                       audio.samples.begin() + std::ptrdiff_t(start + target));
  } else {
    out.samples = audio.samples;
    out.samples.resize(target, 0.0f);
  }
  return out;
}

}  // namespace condaudio::dsp
