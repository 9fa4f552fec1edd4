#include "snnse/core/layers.hpp"

#include <string>

#include "snnse/engine/shape_ops.hpp"

namespace snnse::core {

template <typename Real>
Tensor<Real> encoder_layer_forward(const Tensor<Real>& in, const SpikingLayer<Real>& layer,
                                   LifState<Real>& state, const SpikeOptions& options) {
  const auto drive = engine::conv1d_forward(in, layer.conv.weight, layer.conv.bias,
                                            layer.conv.geometry);
  return lif_step(state, layer.lif, drive, options);
}

template <typename Real>
Tensor<Real> decoder_input(const Tensor<Real>& in, const Tensor<Real>& skip) {
  if (in.rank() != 2 || skip.rank() != 2) throw ShapeError("decoder input must be {L, C}");
  const std::size_t up_len = 2 * in.dim(0);
  const std::size_t skip_len = skip.dim(0);
  if (skip_len != up_len && skip_len + 1 != up_len) {
    throw ShapeError("skip length " + std::to_string(skip_len) + " incompatible with input length " +
                     std::to_string(in.dim(0)));
  }
  return engine::channel_concat(engine::trailing_crop(engine::nearest_upsample2(in), skip_len),
                                skip);
}

template <typename Real>
Tensor<Real> decoder_layer_forward(const Tensor<Real>& in, const Tensor<Real>& skip,
                                   const SpikingLayer<Real>& layer, LifState<Real>& state,
                                   const SpikeOptions& options) {
  return encoder_layer_forward(decoder_input(in, skip), layer, state, options);
}

template <typename Real>
Tensor<Real> readout_forward(const Tensor<Real>& in, const ReadoutLayer<Real>& layer,
                             Tensor<Real>& membrane) {
  const auto drive = engine::conv1d_forward(in, layer.conv.weight, layer.conv.bias,
                                            layer.conv.geometry);
  engine::require_shape(membrane, drive.shape(), "readout membrane");
  const std::size_t channels = drive.dim(1);
  if (layer.beta.size() != channels) throw ShapeError("readout beta channel mismatch");
  for (std::size_t j = 0; j < drive.size(); ++j) {
    membrane[j] = layer.beta[j % channels] * membrane[j] + drive[j];
  }
  return membrane;
}

#define SNNSE_INSTANTIATE(Real)                                                                \
  template Tensor<Real> encoder_layer_forward(const Tensor<Real>&, const SpikingLayer<Real>&,  \
                                              LifState<Real>&, const SpikeOptions&);           \
  template Tensor<Real> decoder_input(const Tensor<Real>&, const Tensor<Real>&);               \
  template Tensor<Real> decoder_layer_forward(const Tensor<Real>&, const Tensor<Real>&,        \
                                              const SpikingLayer<Real>&, LifState<Real>&,      \
                                              const SpikeOptions&);                            \
  template Tensor<Real> readout_forward(const Tensor<Real>&, const ReadoutLayer<Real>&,        \
                                        Tensor<Real>&);
SNNSE_INSTANTIATE(float)
SNNSE_INSTANTIATE(double)
#undef SNNSE_INSTANTIATE

}  // namespace snnse::core
