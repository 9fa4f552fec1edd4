#pragma once

#include "snnse/core/lif.hpp"
#include "snnse/engine/conv.hpp"

namespace snnse::core {

template <typename Real>
struct ConvWeights {
  engine::ConvGeometry geometry;
  Tensor<Real> weight;  // {k, C_in, C_out}
  Tensor<Real> bias;    // {C_out}

  std::size_t in_channels() const { return weight.dim(1); }
  std::size_t out_channels() const { return weight.dim(2); }

  static ConvWeights zeros(engine::ConvGeometry g, std::size_t in, std::size_t out) {
    return {g, Tensor<Real>({static_cast<std::size_t>(g.kernel), in, out}), Tensor<Real>({out})};
  }
};

template <typename Real>
struct SpikingLayer {
  ConvWeights<Real> conv;
  LifParams<Real> lif;
};

// Non-spiking integrator layer producing one real value per bin.
template <typename Real>
struct ReadoutLayer {
  ConvWeights<Real> conv;
  Tensor<Real> beta;  // {1}
};

// conv (strided) + bias, then one LIF step. Returns binary spikes
// {L', C_out}. For the first layer `in` is the real-valued spectrum frame,
// which the layer's own dynamics turn into spikes.
template <typename Real>
Tensor<Real> encoder_layer_forward(const Tensor<Real>& in, const SpikingLayer<Real>& layer,
                                   LifState<Real>& state, const SpikeOptions& options = {});

// Nearest-neighbour x2 upsample of `in`, trailing crop to the skip length,
// then [upsampled, skip] channel concatenation. Skip length must be 2L or
// 2L - 1.
template <typename Real>
Tensor<Real> decoder_input(const Tensor<Real>& in, const Tensor<Real>& skip);

template <typename Real>
Tensor<Real> decoder_layer_forward(const Tensor<Real>& in, const Tensor<Real>& skip,
                                   const SpikingLayer<Real>& layer, LifState<Real>& state,
                                   const SpikeOptions& options = {});

// U(t+1) = beta_r U(t) + conv(in); returns U(t+1) as {L, 1}. No threshold.
template <typename Real>
Tensor<Real> readout_forward(const Tensor<Real>& in, const ReadoutLayer<Real>& layer,
                             Tensor<Real>& membrane);

}  // namespace snnse::core
