#include "snnse/dsp/lps.hpp"

#include <algorithm>
#include <cmath>

#include "snnse/error.hpp"

namespace snnse::dsp {

LpsSpectrogram lps_from_magnitude(const MagnitudeSpectrogram& mag) {
  LpsSpectrogram lps(mag.frames, mag.bins);
  for (std::size_t i = 0; i < mag.values.size(); ++i) {
    const double m = mag.values[i];
    if (!(m >= 0.0)) throw DomainError("negative or NaN magnitude");
    lps.values[i] = std::log(std::max(m * m, kPowerFloor));
  }
  return lps;
}

MagnitudeSpectrogram magnitude_from_lps(const LpsSpectrogram& lps) {
  MagnitudeSpectrogram mag(lps.frames, lps.bins);
  for (std::size_t i = 0; i < lps.values.size(); ++i) {
    if (!std::isfinite(lps.values[i])) throw DomainError("non-finite LPS value");
    mag.values[i] = std::sqrt(std::exp(lps.values[i]));
  }
  return mag;
}

LpsSpectrogram waveform_lps(const Waveform& w, const StftConfig& cfg) {
  return lps_from_magnitude(magnitude(stft(w, cfg)));
}

}  // namespace snnse::dsp
