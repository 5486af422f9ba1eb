#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "condaudio/mat.hpp"
#include "condaudio/wav.hpp"

namespace condaudio::dsp {

// Frame geometry convention used throughout: frame l is centered at sample
// l*hop, and the frame count is ceil(len/hop) (so a 10 s clip at 16 kHz with
// hop 160 yields exactly 1000 frames at 100 frames/s). The signal is
// reflect-padded around the edges; inputs shorter than one window fall back
// to zero padding around a single centered frame.
struct ComplexSpectrogram {
  std::size_t window_size = 0;
  std::size_t hop = 0;
  int sample_rate = 0;
  std::size_t n_frames = 0;
  std::vector<std::complex<double>> bins;  // n_frames x n_bins, row-major

  std::size_t n_bins() const { return window_size / 2 + 1; }
  std::complex<double> at(std::size_t frame, std::size_t bin) const {
    return bins[frame * n_bins() + bin];
  }
  double frame_rate() const { return double(sample_rate) / double(hop); }
};

// Per-frame scalar series. For pitch, unvoiced frames carry value 0 and
// voiced[l] == 0; for energy, every frame counts as voiced.
struct Contour {
  std::vector<float> values;
  std::vector<std::uint8_t> voiced;
  double frame_rate = 0.0;

  std::size_t frames() const { return values.size(); }
};

struct QuantizedContour {
  std::vector<int> indices;  // in [0, n_bins-1]; bin 0 is reserved for silence
  int n_bins = 256;
  float v_min = 0.0f;
  float v_max = 0.0f;
  double frame_rate = 0.0;
};

struct F0Params {
  double f_min = 40.0;
  double f_max = 1600.0;
  std::size_t hop = 160;
  double voicing_threshold = 0.3;
};

ComplexSpectrogram stft(const AudioBuffer& audio, std::size_t window_size, std::size_t hop);

// values[l] = sqrt(sum_k |X[l,k]|^2)
Contour frame_energy(const ComplexSpectrogram& spec);

// YIN-style F0 tracker: cumulative-mean-normalized difference function over
// lags [sr/f_max, sr/f_min], parabolic minimum refinement. A frame is voiced
// when its periodicity strength (1 - min CMND) reaches the threshold.
Contour estimate_f0(const AudioBuffer& audio, const F0Params& params = {});

// Mexican-hat wavelet decomposition at dyadic scales 1, 2, 4, ... The contour
// is linearly interpolated across unvoiced gaps and z-normalized over voiced
// frames before the transform, so a constant input maps to exact zeros.
Mat cwt_decompose(const Contour& contour, std::size_t n_scales);

// Approximate inverse of cwt_decompose: per-scale weighted sum of the
// coefficient rows. Returns the reconstruction of the *normalized* contour.
Contour cwt_reconstruct(const Mat& coeffs, std::size_t n_scales, double frame_rate);

// index = 1 + floor((n_bins-2) * (ln v - ln v_min) / (ln v_max - ln v_min)),
// clamped to [1, n_bins-1]; unvoiced/zero frames map to the reserved bin 0.
QuantizedContour log_quantize(const Contour& contour, int n_bins, float v_min, float v_max);

// bin 0 -> 0; bin b >= 1 -> geometric center of the bin in log space.
Contour log_dequantize(const QuantizedContour& q);

}  // namespace condaudio::dsp
