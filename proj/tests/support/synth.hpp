#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "snnse/dsp/waveform.hpp"

namespace snnse::testing {

struct SpeechPair {
  dsp::Waveform clean;
  dsp::Waveform noisy;
};

// Voiced syllables (gliding f0, harmonics shaped by three moving formants)
// separated by pauses, plus additive noise at `snr_db`.
SpeechPair synth_speech(double seconds, int sample_rate, std::uint64_t seed, double snr_db = 5.0);

dsp::Waveform sine(double freq, double seconds, int sample_rate, double amplitude = 1.0);
dsp::Waveform white_noise(std::size_t n, int sample_rate, std::uint64_t seed, double stddev);

// Unique directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct ToyCorpus {
  std::filesystem::path clean_dir;
  std::filesystem::path noisy_dir;
  std::vector<std::string> ids;
};

// Writes `count` synthetic pairs as 16-bit WAVs under root/clean, root/noisy.
ToyCorpus write_toy_corpus(const std::filesystem::path& root, std::size_t count, double seconds,
                           int sample_rate, std::uint64_t seed);

}  // namespace snnse::testing
