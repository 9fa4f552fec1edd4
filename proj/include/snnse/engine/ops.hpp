#pragma once

#include <span>

#include "snnse/core/lif.hpp"
#include "snnse/engine/conv.hpp"
#include "snnse/engine/tape.hpp"

namespace snnse::engine {

// Differentiable primitives recorded on a Tape. Each forward calls the same
// kernel used by the tape-free inference path.

template <typename Real>
VarId conv1d(Tape<Real>& tape, VarId x, VarId w, VarId b, const ConvGeometry& g);

template <typename Real>
VarId upsample2(Tape<Real>& tape, VarId x);

template <typename Real>
VarId crop(Tape<Real>& tape, VarId x, std::size_t length);

template <typename Real>
VarId concat_channels(Tape<Real>& tape, VarId a, VarId b);

template <typename Real>
VarId scale_shift(Tape<Real>& tape, VarId x, Real scale, Real shift);

// Row m of a {M, K} tensor as a {K, 1} feature map.
template <typename Real>
VarId select_frame(Tape<Real>& tape, VarId frames, std::size_t m);

// Stacks {K, 1} feature maps into {M, K}.
template <typename Real>
VarId stack_frames(Tape<Real>& tape, std::span<const VarId> frames);

struct LifVars {
  VarId current;
  VarId membrane;
  VarId spikes;
};

// One LIF update (see core::lif_step). The backward pass recomputes the
// spike nonlinearity from the saved membrane potential and never reads the
// stored spike tensor.
template <typename Real>
LifVars lif_step(Tape<Real>& tape, VarId current, VarId membrane, VarId drive, VarId alpha,
                 VarId beta, VarId threshold, const core::SpikeOptions& options);

template <typename Real>
struct SpikeNodeGradient {
  Real membrane;   // contribution to d/dU(t) through the spike
  Real threshold;  // contribution to d/du_th, including the reset term
};

// Backward of S = Theta(U - u_th) and of the -u_th * S reset, for one neuron.
// Uses only the saved membrane U(t): dS/dU := g(U - u_th), dS/du_th := -g.
// `grad_spike` is dL/dS(t) from downstream, `grad_membrane_next` is
// dL/dU(t+1); the reset path feeds back into dS only without detach_reset.
template <typename Real>
SpikeNodeGradient<Real> spike_node_backward(Real grad_spike, Real grad_membrane_next,
                                            Real membrane, Real threshold,
                                            const core::SpikeOptions& options);

// Non-spiking integrator: U' = beta * U + drive.
template <typename Real>
VarId leaky_integrate(Tape<Real>& tape, VarId membrane, VarId drive, VarId beta);

// Scalar LSD loss against a constant reference.
template <typename Real>
VarId lsd(Tape<Real>& tape, VarId est, const Tensor<Real>& ref);

}  // namespace snnse::engine
