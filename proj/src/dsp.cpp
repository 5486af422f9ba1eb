#include "condaudio/dsp.hpp"

#include <cmath>
#include <numbers>

#include "condaudio/errors.hpp"

namespace condaudio::dsp {
namespace {

constexpr double kPi = std::numbers::pi;

// Reflection without edge duplication (librosa-style); degenerates to the
// single sample for length-1 inputs.
double sample_reflect(const std::vector<float>& x, long long i) {
  const long long n = (long long)x.size();
  if (n == 1) return x[0];
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return x[std::size_t(i)];
}

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_pow2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / double(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

std::vector<std::complex<double>> dft_naive(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * double(k) * double(j) / double(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * double(i) / double(n));
  return w;
}

std::size_t frame_count(std::size_t samples, std::size_t hop) {
  return (samples + hop - 1) / hop;
}

// Mexican-hat mother wavelet, unit scale.
double mexican_hat(double t) {
  static const double c = 2.0 / (std::sqrt(3.0) * std::pow(kPi, 0.25));
  return c * (1.0 - t * t) * std::exp(-0.5 * t * t);
}

// Gap-fill across unvoiced frames, then z-normalize using voiced statistics.
std::vector<double> normalize_contour(const Contour& contour) {
  const std::size_t n = contour.frames();
  std::vector<double> filled(n);
  long long prev = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (contour.voiced[i]) {
      filled[i] = contour.values[i];
      if (prev >= 0 && std::size_t(prev) + 1 < i) {
        const double a = filled[std::size_t(prev)];
        const double b = filled[i];
        const double span = double(i) - double(prev);
        for (std::size_t j = std::size_t(prev) + 1; j < i; ++j)
          filled[j] = a + (b - a) * (double(j) - double(prev)) / span;
      } else if (prev < 0) {
        for (std::size_t j = 0; j < i; ++j) filled[j] = contour.values[i];
      }
      prev = (long long)i;
    }
  }
  if (prev >= 0)
    for (std::size_t j = std::size_t(prev) + 1; j < n; ++j)
      filled[j] = filled[std::size_t(prev)];

  double mean = 0.0;
  std::size_t voiced_n = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (contour.voiced[i]) {
      mean += contour.values[i];
      ++voiced_n;
    }
  mean /= double(voiced_n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (contour.voiced[i]) {
      const double d = contour.values[i] - mean;
      var += d * d;
    }
  var /= double(voiced_n);
  const double sd = std::sqrt(var);
  const double inv = sd > 1e-12 ? 1.0 / sd : 0.0;
  for (double& v : filled) v = (v - mean) * inv;
  return filled;
}

}  // namespace

ComplexSpectrogram stft(const AudioBuffer& audio, std::size_t window_size, std::size_t hop) {
  if (audio.samples.empty()) throw DataError("empty input");
  if (hop == 0 || window_size < hop)
    throw std::invalid_argument("stft: require window_size >= hop > 0");

  const std::size_t n = audio.samples.size();
  const bool zero_pad_only = window_size > n;  // one zero-padded frame
  const std::size_t frames = zero_pad_only ? 1 : frame_count(n, hop);
  const auto window = hann_window(window_size);
  const std::size_t half = window_size / 2;

  ComplexSpectrogram spec;
  spec.window_size = window_size;
  spec.hop = hop;
  spec.sample_rate = audio.sample_rate;
  spec.n_frames = frames;
  spec.bins.resize(frames * spec.n_bins());

  std::vector<double> frame(window_size);
  std::vector<std::complex<double>> buf(window_size);
  for (std::size_t l = 0; l < frames; ++l) {
    for (std::size_t i = 0; i < window_size; ++i) {
      double s;
      if (zero_pad_only) {
        // center the whole signal in the single frame
        const long long idx = (long long)i - (long long)((window_size - n) / 2);
        s = (idx >= 0 && idx < (long long)n) ? audio.samples[std::size_t(idx)] : 0.0;
      } else {
        s = sample_reflect(audio.samples, (long long)(l * hop) + (long long)i - (long long)half);
      }
      frame[i] = s * window[i];
    }
    if (is_pow2(window_size)) {
      for (std::size_t i = 0; i < window_size; ++i) buf[i] = frame[i];
      fft_pow2(buf);
      for (std::size_t k = 0; k <= half; ++k) spec.bins[l * spec.n_bins() + k] = buf[k];
    } else {
      auto full = dft_naive(frame);
      for (std::size_t k = 0; k <= half; ++k) spec.bins[l * spec.n_bins() + k] = full[k];
    }
  }
  return spec;
}

Contour frame_energy(const ComplexSpectrogram& spec) {
  Contour out;
  out.frame_rate = spec.frame_rate();
  out.values.resize(spec.n_frames);
  out.voiced.assign(spec.n_frames, 1);
  for (std::size_t l = 0; l < spec.n_frames; ++l) {
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.n_bins(); ++k) {
      const auto z = spec.at(l, k);
      acc += z.real() * z.real() + z.imag() * z.imag();
    }
    out.values[l] = float(std::sqrt(acc));
  }
  return out;
}

Contour estimate_f0(const AudioBuffer& audio, const F0Params& params) {
  if (audio.samples.empty()) throw DataError("empty input");
  if (!(params.f_min > 0.0 && params.f_min < params.f_max &&
        params.f_max < audio.sample_rate / 2.0))
    throw std::invalid_argument("estimate_f0: require 0 < f_min < f_max < sample_rate/2");
  if (params.hop == 0) throw std::invalid_argument("estimate_f0: hop must be positive");

  constexpr std::size_t kWindow = 1024;     // integration window
  constexpr double kDipThreshold = 0.1;     // YIN absolute threshold
  const std::size_t sr = std::size_t(audio.sample_rate);
  const auto tau_min = std::max<std::size_t>(2, std::size_t(double(sr) / params.f_max));
  const auto tau_max = std::min<std::size_t>(
      kWindow, std::size_t(std::ceil(double(sr) / params.f_min)));

  const std::size_t frames = frame_count(audio.samples.size(), params.hop);
  Contour out;
  out.frame_rate = double(audio.sample_rate) / double(params.hop);
  out.values.assign(frames, 0.0f);
  out.voiced.assign(frames, 0);

  std::vector<double> seg(kWindow + tau_max);
  std::vector<double> d(tau_max + 1, 0.0);
  std::vector<double> dn(tau_max + 1, 1.0);

  for (std::size_t l = 0; l < frames; ++l) {
    const long long start = (long long)(l * params.hop) - (long long)(kWindow / 2);
    double rms = 0.0;
    for (std::size_t i = 0; i < seg.size(); ++i) {
      seg[i] = sample_reflect(audio.samples, start + (long long)i);
      rms += seg[i] * seg[i];
    }
    rms = std::sqrt(rms / double(seg.size()));
    if (rms < 1e-6) continue;  // silence: unvoiced

    // difference function and cumulative-mean normalization
    double cum = 0.0;
    for (std::size_t tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (std::size_t j = 0; j < kWindow; ++j) {
        const double diff = seg[j] - seg[j + tau];
        acc += diff * diff;
      }
      d[tau] = acc;
      cum += acc;
      dn[tau] = cum > 0.0 ? acc * double(tau) / cum : 1.0;
    }

    // first dip below the absolute threshold, else the global minimum
    std::size_t best = 0;
    for (std::size_t tau = tau_min; tau <= tau_max; ++tau) {
      if (dn[tau] < kDipThreshold) {
        best = tau;
        while (best + 1 <= tau_max && dn[best + 1] < dn[best]) ++best;
        break;
      }
    }
    if (best == 0) {
      best = tau_min;
      for (std::size_t tau = tau_min + 1; tau <= tau_max; ++tau)
        if (dn[tau] < dn[best]) best = tau;
    }

    // parabolic refinement around the minimum
    double tau_refined = double(best);
    double dip = dn[best];
    if (best > tau_min && best < tau_max) {
      const double y0 = dn[best - 1], y1 = dn[best], y2 = dn[best + 1];
      const double denom = y0 - 2.0 * y1 + y2;
      if (std::fabs(denom) > 1e-12) {
        const double shift = 0.5 * (y0 - y2) / denom;
        if (std::fabs(shift) <= 1.0) {
          tau_refined = double(best) + shift;
          dip = y1 - 0.25 * (y0 - y2) * shift;
        }
      }
    }

    const double strength = 1.0 - dip;
    if (strength >= params.voicing_threshold && tau_refined > 0.0) {
      const double f0 = double(sr) / tau_refined;
      if (f0 >= params.f_min * 0.9 && f0 <= params.f_max * 1.1) {
        out.values[l] = float(f0);
        out.voiced[l] = 1;
      }
    }
  }
  return out;
}

Mat cwt_decompose(const Contour& contour, std::size_t n_scales) {
  if (n_scales == 0 || n_scales > 24)
    throw std::invalid_argument("cwt_decompose: n_scales must be in [1, 24]");
  std::size_t voiced_n = 0;
  for (auto v : contour.voiced) voiced_n += v ? 1 : 0;
  if (voiced_n < 2) throw DataError("contour too sparse");

  const auto x = normalize_contour(contour);
  const std::size_t n = x.size();
  Mat out(n, n_scales);

  for (std::size_t j = 0; j < n_scales; ++j) {
    const double s = double(std::size_t(1) << j);
    const auto radius = (long long)std::ceil(5.0 * s);
    std::vector<double> kernel(std::size_t(2 * radius + 1));
    const double norm = 1.0 / std::sqrt(s);
    for (long long k = -radius; k <= radius; ++k)
      kernel[std::size_t(k + radius)] = norm * mexican_hat(double(k) / s);
    for (std::size_t l = 0; l < n; ++l) {
      double acc = 0.0;
      for (long long k = -radius; k <= radius; ++k) {
        const long long idx = (long long)l + k;
        double v;
        if (idx >= 0 && idx < (long long)n) {
          v = x[std::size_t(idx)];
        } else if (n == 1) {
          v = x[0];
        } else {
          long long i = idx;
          while (i < 0 || i >= (long long)n) {
            if (i < 0) i = -i;
            if (i >= (long long)n) i = 2 * (long long)n - 2 - i;
          }
          v = x[std::size_t(i)];
        }
        acc += v * kernel[std::size_t(k + radius)];
      }
      out(l, j) = acc;
    }
  }
  return out;
}

Contour cwt_reconstruct(const Mat& coeffs, std::size_t n_scales, double frame_rate) {
  if (coeffs.cols() != n_scales)
    throw std::invalid_argument("cwt_reconstruct: scale-count mismatch (matrix has " +
                                std::to_string(coeffs.cols()) + " scales, expected " +
                                std::to_string(n_scales) + ")");
  // Flat-response weights: sum_j psi_hat(2^j w) ~= c*sqrt(2*pi)/ln 2, so K
  // rescales the per-scale 1/sqrt(s) sum back to unit gain in the pass band.
  static const double c = 2.0 / (std::sqrt(3.0) * std::pow(kPi, 0.25));
  const double gain = std::log(2.0) / (c * std::sqrt(2.0 * kPi));

  Contour out;
  out.frame_rate = frame_rate;
  out.values.assign(coeffs.rows(), 0.0f);
  out.voiced.assign(coeffs.rows(), 1);
  for (std::size_t l = 0; l < coeffs.rows(); ++l) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_scales; ++j) {
      const double s = double(std::size_t(1) << j);
      acc += coeffs(l, j) / std::sqrt(s);
    }
    out.values[l] = float(gain * acc);
  }
  return out;
}

QuantizedContour log_quantize(const Contour& contour, int n_bins, float v_min, float v_max) {
  if (n_bins < 2) throw std::invalid_argument("log_quantize: n_bins must be >= 2");
  if (!(v_min > 0.0f && v_min < v_max))
    throw std::invalid_argument("log_quantize: require 0 < v_min < v_max");

  QuantizedContour q;
  q.n_bins = n_bins;
  q.v_min = v_min;
  q.v_max = v_max;
  q.frame_rate = contour.frame_rate;
  q.indices.resize(contour.frames());

  const double log_lo = std::log(double(v_min));
  const double log_span = std::log(double(v_max)) - log_lo;
  for (std::size_t l = 0; l < contour.frames(); ++l) {
    const double v = contour.values[l];
    if (!contour.voiced[l] || v <= 0.0) {
      q.indices[l] = 0;
      continue;
    }
    const double clamped = std::clamp(v, double(v_min), double(v_max));
    const double r = (std::log(clamped) - log_lo) / log_span;
    int idx = 1 + int(std::floor(double(n_bins - 2) * r));
    q.indices[l] = std::clamp(idx, 1, n_bins - 1);
  }
  return q;
}

Contour log_dequantize(const QuantizedContour& q) {
  Contour out;
  out.frame_rate = q.frame_rate;
  out.values.resize(q.indices.size());
  out.voiced.resize(q.indices.size());
  const double log_lo = std::log(double(q.v_min));
  const double log_span = std::log(double(q.v_max)) - log_lo;
  for (std::size_t l = 0; l < q.indices.size(); ++l) {
    const int b = q.indices[l];
    if (b == 0) {
      out.values[l] = 0.0f;
      out.voiced[l] = 0;
      continue;
    }
    out.voiced[l] = 1;
    if (b == q.n_bins - 1) {
      out.values[l] = q.v_max;
    } else if (q.n_bins == 2) {
      out.values[l] = float(std::exp(log_lo + 0.5 * log_span));  // whole-range center
    } else {
      const double step = log_span / double(q.n_bins - 2);
      out.values[l] = float(std::exp(log_lo + (double(b - 1) + 0.5) * step));
    }
  }
  return out;
}

}  // namespace condaudio::dsp
