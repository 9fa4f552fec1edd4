#pragma once

#include <span>
#include <vector>

#include "snnse/dsp/waveform.hpp"

namespace snnse::dsp {

inline constexpr int kCorpusRate = 48000;
inline constexpr int kModelRate = 16000;

// Kaiser-windowed sinc low-pass for 48 kHz -> 16 kHz decimation:
// 241 taps, beta 8.6, cutoff 7.2 kHz, normalized to unit DC gain.
const std::vector<double>& decimation_filter();

// Low-pass then keep every third sample. Output length is ceil(len / 3).
// Edges use whole-sample symmetric extension.
Waveform resample_to_16k(const Waveform& w);

// Accepts 16 kHz (returned unchanged) or 48 kHz (decimated).
Waveform to_model_rate(const Waveform& w);

}  // namespace snnse::dsp
