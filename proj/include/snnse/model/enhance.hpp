#pragma once

#include "snnse/core/spike_stats.hpp"
#include "snnse/dsp/stft.hpp"
#include "snnse/dsp/waveform.hpp"
#include "snnse/model/unet.hpp"

namespace snnse::model {

// Resample to 16 kHz, STFT, LPS, network, magnitude, noisy-phase iSTFT.
// The input is zero-padded to whole hops so every sample is covered; the
// output has exactly the 16 kHz input length.
dsp::Waveform enhance(const Model<float>& model, const dsp::Waveform& input,
                      core::SpikeRecord* record = nullptr, const dsp::StftConfig& cfg = {});

// Samples needed so that frames tile [0, length) completely.
std::size_t padded_length(std::size_t length, const dsp::StftConfig& cfg);

}  // namespace snnse::model
