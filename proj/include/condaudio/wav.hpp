#pragma once

#include <filesystem>
#include <vector>

namespace condaudio::dsp {

struct AudioBuffer {
  std::vector<float> samples;  // mono, in [-1, 1]
  int sample_rate = 0;

  double duration() const {
    return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0;
  }
};

// Reads a RIFF/WAVE file. Supported encodings: 16-bit PCM and 32-bit IEEE
// float. Multi-channel audio is averaged down to mono.
AudioBuffer read_wav(const std::filesystem::path& path);

void write_wav_pcm16(const std::filesystem::path& path, const AudioBuffer& audio);
void write_wav_f32(const std::filesystem::path& path, const AudioBuffer& audio);

// Linear-interpolation resampler.
AudioBuffer resample_linear(const AudioBuffer& audio, int target_rate);

// read_wav + mono + resample to 16 kHz. Resampling logs a warning to stderr.
AudioBuffer load_audio_16k(const std::filesystem::path& path);

// Pads with silence or center-crops so the buffer holds exactly `seconds`.
AudioBuffer fit_duration(const AudioBuffer& audio, double seconds);

}  // namespace condaudio::dsp
