#include "snnse/dsp/resample.hpp"

#include <cmath>
#include <numbers>

#include "snnse/error.hpp"

namespace snnse::dsp {
namespace {

constexpr int kTaps = 241;
constexpr double kKaiserBeta = 8.6;
constexpr double kCutoffHz = 7200.0;
constexpr int kFactor = 3;

std::vector<double> design_filter() {
  std::vector<double> h(kTaps);
  const int center = kTaps / 2;
  const double fc = kCutoffHz / kCorpusRate;  // cycles per sample
  const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
  double sum = 0.0;
  for (int n = 0; n < kTaps; ++n) {
    const double t = n - center;
    const double sinc =
        t == 0 ? 2.0 * fc
               : std::sin(2.0 * std::numbers::pi * fc * t) / (std::numbers::pi * t);
    const double r = t / center;
    const double kaiser = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
    h[n] = sinc * kaiser;
    sum += h[n];
  }
  for (double& v : h) v /= sum;
  return h;
}

// Whole-sample symmetric reflection: -1 -> 1, len -> len-2.
double reflected(const std::vector<double>& x, long i) {
  const long n = static_cast<long>(x.size());
  if (n == 1) return x[0];
  const long period = 2 * (n - 1);
  long j = i % period;
  if (j < 0) j += period;
  if (j >= n) j = period - j;
  return x[static_cast<std::size_t>(j)];
}

}  // namespace

const std::vector<double>& decimation_filter() {
  static const std::vector<double> h = design_filter();
  return h;
}

Waveform resample_to_16k(const Waveform& w) {
  if (w.sample_rate != kCorpusRate) {
    throw UnsupportedRateError("sample_rate=" + std::to_string(w.sample_rate) +
                               " (expected 48000)");
  }
  const auto& h = decimation_filter();
  const long center = kTaps / 2;
  const long n = static_cast<long>(w.samples.size());
  Waveform out;
  out.sample_rate = kModelRate;
  out.samples.resize(static_cast<std::size_t>((n + kFactor - 1) / kFactor));
  for (std::size_t m = 0; m < out.samples.size(); ++m) {
    const long base = static_cast<long>(m) * kFactor + center;
    double acc = 0.0;
    if (base - (kTaps - 1) >= 0 && base < n) {
      for (int j = 0; j < kTaps; ++j) acc += h[j] * w.samples[base - j];
    } else {
      for (int j = 0; j < kTaps; ++j) acc += h[j] * reflected(w.samples, base - j);
    }
    out.samples[m] = acc;
  }
  return out;
}

Waveform to_model_rate(const Waveform& w) {
  if (w.sample_rate == kModelRate) return w;
  return resample_to_16k(w);
}

}  // namespace snnse::dsp
