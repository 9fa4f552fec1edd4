#pragma once

#include "snnse/core/lif.hpp"

namespace snnse::engine {

inline constexpr double kMaxDecay = 0.999;
inline constexpr double kMinThreshold = 0.01;

// Decays to [0, 0.999].
template <typename Real>
void clamp_decay(Tensor<Real>& decay);

// Thresholds to [0.01, inf).
template <typename Real>
void clamp_threshold(Tensor<Real>& threshold);

template <typename Real>
void clamp_neuron_params(core::LifParams<Real>& params) {
  clamp_decay(params.alpha);
  clamp_decay(params.beta);
  clamp_threshold(params.threshold);
}

}  // namespace snnse::engine
