#pragma once

#include "snnse/dsp/stft.hpp"

namespace snnse::dsp {

inline constexpr double kPowerFloor = 1e-10;
// ln(kPowerFloor): value of a silent bin.
inline const double kLpsFloor = -23.025850929940457;

// ln(max(mag^2, 1e-10)).
LpsSpectrogram lps_from_magnitude(const MagnitudeSpectrogram& mag);

// sqrt(exp(lps)).
MagnitudeSpectrogram magnitude_from_lps(const LpsSpectrogram& lps);

// stft -> magnitude -> LPS.
LpsSpectrogram waveform_lps(const Waveform& w, const StftConfig& cfg = {});

}  // namespace snnse::dsp
