#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "snnse/dsp/waveform.hpp"

namespace snnse::dsp {

struct StftConfig {
  int frame_len = 512;  // 32 ms at 16 kHz
  int hop_len = 256;    // 16 ms

  int fft_len() const { return frame_len; }
  int bins() const { return fft_len() / 2 + 1; }

  // frame_len must be a power of two and hop_len = frame_len / 2.
  void validate() const;

  bool operator==(const StftConfig&) const = default;
};

// Periodic Hann: w[n] = 0.5 - 0.5 cos(2 pi n / N).
std::vector<double> periodic_hann(int n);

struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> values;  // frame-major
  StftConfig config;

  std::complex<double>& at(std::size_t m, std::size_t k) {
    return values[m * bins + k];
  }
  const std::complex<double>& at(std::size_t m, std::size_t k) const {
    return values[m * bins + k];
  }
};

// Tagged real-valued time-frequency grid (frames x bins, frame-major).
template <typename Tag>
struct RealGrid {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<double> values;

  RealGrid() = default;
  RealGrid(std::size_t m, std::size_t k, double fill = 0.0)
      : frames(m), bins(k), values(m * k, fill) {}

  double& at(std::size_t m, std::size_t k) { return values[m * bins + k]; }
  double at(std::size_t m, std::size_t k) const { return values[m * bins + k]; }
};

struct MagnitudeTag {};
struct LpsTag {};
using MagnitudeSpectrogram = RealGrid<MagnitudeTag>;
using LpsSpectrogram = RealGrid<LpsTag>;

// Number of full frames: floor((len - frame_len) / hop) + 1.
std::size_t frame_count(std::size_t length, const StftConfig& cfg);

// Frame m covers samples [m*hop, m*hop + frame_len); no padding.
ComplexSpectrogram stft(const Waveform& w, const StftConfig& cfg = {});

// Weighted overlap-add with the analysis window, normalized by the
// overlapped window-square sum. Output length (frames-1)*hop + frame_len.
Waveform istft(const ComplexSpectrogram& s, const StftConfig& cfg = {},
               int sample_rate = 16000);

MagnitudeSpectrogram magnitude(const ComplexSpectrogram& s);

// est_mag combined with the phase of `noisy`, then istft. Bins where
// `noisy` is exactly zero stay zero.
Waveform reconstruct(const MagnitudeSpectrogram& est_mag,
                     const ComplexSpectrogram& noisy, const StftConfig& cfg = {},
                     int sample_rate = 16000);

// Trim or zero-pad to exactly `length` samples.
void fit_length(Waveform& w, std::size_t length);

}  // namespace snnse::dsp
