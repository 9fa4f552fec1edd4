#include "snnse/dsp/stft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "snnse/error.hpp"

namespace snnse::dsp {
namespace {

// FFTW plans are created once per length under a lock; executing a plan on
// caller-owned arrays (new-array execute) is thread-safe.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    forward_ = fftw_plan_dft_r2c_1d(n, in.data(), out.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_1d(n, out.data(), in.data(),
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~RealFft() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void forward(std::vector<double>& in, std::complex<double>* out) const {
    fftw_execute_dft_r2c(forward_, in.data(), reinterpret_cast<fftw_complex*>(out));
  }
  // Unnormalized; c2r overwrites its input.
  void inverse(std::vector<std::complex<double>>& in, std::vector<double>& out) const {
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(in.data()), out.data());
  }

 private:
  int n_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

const RealFft& fft_for(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<RealFft>> plans;
  std::lock_guard lock(mu);
  auto& slot = plans[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace

void StftConfig::validate() const {
  if (frame_len <= 0 || !std::has_single_bit(static_cast<unsigned>(frame_len))) {
    throw DomainError("frame_len=" + std::to_string(frame_len) + " (power of two required)");
  }
  if (hop_len * 2 != frame_len) {
    throw DomainError("hop_len=" + std::to_string(hop_len) + " (must equal frame_len/2)");
  }
}

std::vector<double> periodic_hann(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

std::size_t frame_count(std::size_t length, const StftConfig& cfg) {
  const auto frame = static_cast<std::size_t>(cfg.frame_len);
  if (length < frame) return 0;
  return (length - frame) / static_cast<std::size_t>(cfg.hop_len) + 1;
}

ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t frames = frame_count(w.samples.size(), cfg);
  if (frames == 0) {
    throw DomainError("signal shorter than one frame (" + std::to_string(w.samples.size()) +
                      " < " + std::to_string(cfg.frame_len) + ")");
  }
  const int n = cfg.fft_len();
  const auto window = periodic_hann(n);
  const auto& fft = fft_for(n);

  ComplexSpectrogram s;
  s.frames = frames;
  s.bins = static_cast<std::size_t>(cfg.bins());
  s.config = cfg;
  s.values.resize(s.frames * s.bins);
  std::vector<double> buf(n);
  for (std::size_t m = 0; m < frames; ++m) {
    const double* src = w.samples.data() + m * cfg.hop_len;
    for (int i = 0; i < n; ++i) buf[i] = src[i] * window[i];
    fft.forward(buf, &s.values[m * s.bins]);
  }
  return s;
}

Waveform istft(const ComplexSpectrogram& s, const StftConfig& cfg, int sample_rate) {
  cfg.validate();
  if (s.config != cfg) throw ShapeError("istft config does not match analysis config");
  if (s.bins != static_cast<std::size_t>(cfg.bins()) || s.values.size() != s.frames * s.bins) {
    throw ShapeError("spectrogram has " + std::to_string(s.bins) + " bins, expected " +
                     std::to_string(cfg.bins()));
  }
  Waveform out;
  out.sample_rate = sample_rate;
  if (s.frames == 0) return out;

  const int n = cfg.fft_len();
  const auto window = periodic_hann(n);
  const auto& fft = fft_for(n);
  const std::size_t length = (s.frames - 1) * cfg.hop_len + n;
  std::vector<double> num(length, 0.0);
  std::vector<double> den(length, 0.0);
  std::vector<std::complex<double>> spec(s.bins);
  std::vector<double> frame(n);
  for (std::size_t m = 0; m < s.frames; ++m) {
    std::copy_n(&s.values[m * s.bins], s.bins, spec.begin());
    fft.inverse(spec, frame);
    const std::size_t offset = m * cfg.hop_len;
    for (int i = 0; i < n; ++i) {
      num[offset + i] += window[i] * frame[i] / n;
      den[offset + i] += window[i] * window[i];
    }
  }
  // Near the outer edges only one tapered frame contributes; flooring the
  // normalizer keeps modified spectra from being amplified there.
  const double floor = 1e-3 * *std::max_element(den.begin(), den.end());
  out.samples.resize(length);
  for (std::size_t i = 0; i < length; ++i) {
    out.samples[i] = num[i] / std::max(den[i], floor);
  }
  return out;
}

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& s) {
  MagnitudeSpectrogram mag(s.frames, s.bins);
  for (std::size_t i = 0; i < s.values.size(); ++i) mag.values[i] = std::abs(s.values[i]);
  return mag;
}

Waveform reconstruct(const MagnitudeSpectrogram& est_mag, const ComplexSpectrogram& noisy,
                     const StftConfig& cfg, int sample_rate) {
  if (est_mag.frames != noisy.frames || est_mag.bins != noisy.bins) {
    throw ShapeError("magnitude " + std::to_string(est_mag.frames) + "x" +
                     std::to_string(est_mag.bins) + " vs spectrogram " +
                     std::to_string(noisy.frames) + "x" + std::to_string(noisy.bins));
  }
  ComplexSpectrogram combined = noisy;
  for (std::size_t i = 0; i < combined.values.size(); ++i) {
    // A zero bin has no phase to borrow.
    const auto& x = noisy.values[i];
    combined.values[i] = x == std::complex<double>{} ? x : std::polar(est_mag.values[i], std::arg(x));
  }
  return istft(combined, cfg, sample_rate);
}

void fit_length(Waveform& w, std::size_t length) { w.samples.resize(length, 0.0); }

}  // namespace snnse::dsp
