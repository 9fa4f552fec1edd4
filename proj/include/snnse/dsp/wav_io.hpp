#pragma once

#include <cstdint>
#include <filesystem>

#include "snnse/dsp/waveform.hpp"

namespace snnse::dsp {

// RIFF/WAVE, 16-bit PCM, mono, little-endian. Samples are int / 32768.
Waveform read_wav(const std::filesystem::path& path);

// Samples are clamped to [-1, 1 - 1/32768] and rounded to the nearest int.
void write_wav(const Waveform& w, const std::filesystem::path& path);

// Quantization used by write_wav, exposed for tests.
std::int16_t quantize_sample(double x);

}  // namespace snnse::dsp
