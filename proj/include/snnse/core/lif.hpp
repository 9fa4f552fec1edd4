#pragma once

#include "snnse/engine/tensor.hpp"

namespace snnse::core {

using engine::Tensor;

// Width of the arctan surrogate; must be positive.
struct SurrogateConfig {
  double width = 1.0;
  void validate() const;
};

enum class SpikeMode {
  kHeaviside,  // Theta(x), with Theta(0) = 1
  kRelaxed,    // smooth twin: sigma(x) = atan(pi x / a) / pi + 1/2
};

struct SpikeOptions {
  SpikeMode mode = SpikeMode::kHeaviside;
  SurrogateConfig surrogate;
  // Block gradient through the spike in the -u_th * S reset term.
  bool detach_reset = true;
};

// g(x) = (1/a) / (1 + (pi x / a)^2), the derivative of sigma.
double arctan_surrogate_grad(double x, const SurrogateConfig& cfg = {});
double arctan_sigmoid(double x, const SurrogateConfig& cfg = {});

template <typename Real>
Real spike_function(Real offset, const SpikeOptions& options) {
  if (options.mode == SpikeMode::kHeaviside) return offset >= Real(0) ? Real(1) : Real(0);
  return static_cast<Real>(arctan_sigmoid(static_cast<double>(offset), options.surrogate));
}

// Per-channel trainable decays and threshold, each of shape {C}.
template <typename Real>
struct LifParams {
  Tensor<Real> alpha;
  Tensor<Real> beta;
  Tensor<Real> threshold;

  std::size_t channels() const { return threshold.size(); }

  static LifParams uniform(std::size_t channels, Real alpha, Real beta, Real threshold) {
    return {Tensor<Real>({channels}, alpha), Tensor<Real>({channels}, beta),
            Tensor<Real>({channels}, threshold)};
  }
};

// Per-neuron synaptic current and membrane potential, each {L, C}.
template <typename Real>
struct LifState {
  Tensor<Real> current;
  Tensor<Real> membrane;

  static LifState zeros(std::size_t length, std::size_t channels) {
    return {Tensor<Real>({length, channels}), Tensor<Real>({length, channels})};
  }
  void reset() {
    current.fill(Real(0));
    membrane.fill(Real(0));
  }
};

// Advances the state by one timestep and returns S(t) = Theta(U(t) - u_th):
//   I(t+1) = alpha I(t) + drive
//   U(t+1) = beta U(t) + I(t) - u_th S(t)
// `drive` is the already-convolved feedforward input, shaped like the state.
template <typename Real>
Tensor<Real> lif_step(LifState<Real>& state, const LifParams<Real>& params,
                      const Tensor<Real>& drive, const SpikeOptions& options = {});

}  // namespace snnse::core
