#include "snnse/core/lif.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace snnse::core {

void SurrogateConfig::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw DomainError("surrogate width=" + std::to_string(width) + " (must be > 0)");
  }
}

double arctan_surrogate_grad(double x, const SurrogateConfig& cfg) {
  const double z = std::numbers::pi * x / cfg.width;
  return 1.0 / (cfg.width * (1.0 + z * z));
}

double arctan_sigmoid(double x, const SurrogateConfig& cfg) {
  return std::atan(std::numbers::pi * x / cfg.width) / std::numbers::pi + 0.5;
}

template <typename Real>
Tensor<Real> lif_step(LifState<Real>& state, const LifParams<Real>& params,
                      const Tensor<Real>& drive, const SpikeOptions& options) {
  engine::require_shape(drive, state.membrane.shape(), "lif drive");
  engine::require_shape(state.current, state.membrane.shape(), "lif current");
  const std::size_t channels = params.channels();
  if (drive.rank() != 2 || drive.dim(1) != channels || params.alpha.size() != channels ||
      params.beta.size() != channels) {
    throw ShapeError("lif params have " + std::to_string(channels) + " channels, state is " +
                     engine::to_string(drive.shape()));
  }
  engine::check_finite(drive, "lif drive");

  const std::size_t length = drive.dim(0);
  Tensor<Real> spikes(drive.shape());
  Real* current = state.current.data();
  Real* membrane = state.membrane.data();
  const Real* in = drive.data();
  Real* out = spikes.data();
  const Real* alpha = params.alpha.data();
  const Real* beta = params.beta.data();
  const Real* threshold = params.threshold.data();
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t row = i * channels;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t j = row + c;
      const Real s = spike_function(membrane[j] - threshold[c], options);
      const Real i_old = current[j];
      current[j] = alpha[c] * i_old + in[j];
      const Real reset = s == Real(0) ? Real(0) : threshold[c] * s;
      membrane[j] = beta[c] * membrane[j] + i_old - reset;
      out[j] = s;
    }
  }
  return spikes;
}

template Tensor<float> lif_step(LifState<float>&, const LifParams<float>&, const Tensor<float>&,
                                const SpikeOptions&);
template Tensor<double> lif_step(LifState<double>&, const LifParams<double>&,
                                 const Tensor<double>&, const SpikeOptions&);

}  // namespace snnse::core
