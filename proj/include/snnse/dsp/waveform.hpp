#pragma once

#include <vector>

namespace snnse::dsp {

// Mono audio, nominal amplitude range [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Throws DomainError if the rate is not positive or a sample is not finite.
void validate(const Waveform& w);

}  // namespace snnse::dsp
