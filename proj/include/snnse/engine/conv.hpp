#pragma once

#include "snnse/engine/tensor.hpp"

namespace snnse::engine {

// 1-D cross-correlation geometry along the frequency axis.
struct ConvGeometry {
  int kernel = 5;
  int stride = 1;

  int pad() const { return (kernel - 1) / 2; }
  // floor((L + 2 pad - k) / stride) + 1
  std::size_t output_length(std::size_t input_length) const;
  void validate() const;
};

// x {L, C_in}, w {k, C_in, C_out}, b {C_out} -> y {L', C_out}.
// Zero inputs are skipped, so binary spike inputs cost only their active
// entries.
template <typename Real>
Tensor<Real> conv1d_forward(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b,
                            const ConvGeometry& g);

// Accumulates the adjoints of conv1d_forward into whichever of dx, dw, db
// are non-null.
template <typename Real>
void conv1d_backward_accumulate(const Tensor<Real>& upstream, const Tensor<Real>& x,
                                const Tensor<Real>& w, const ConvGeometry& g, Tensor<Real>* dx,
                                Tensor<Real>* dw, Tensor<Real>* db);

template <typename Real>
struct ConvGradients {
  Tensor<Real> dx;
  Tensor<Real> dw;
  Tensor<Real> db;
};

template <typename Real>
ConvGradients<Real> conv1d_backward(const Tensor<Real>& upstream, const Tensor<Real>& x,
                                    const Tensor<Real>& w, const ConvGeometry& g);

}  // namespace snnse::engine
