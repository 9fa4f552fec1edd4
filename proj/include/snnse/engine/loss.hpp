#pragma once

#include "snnse/engine/tensor.hpp"

namespace snnse::engine {

inline constexpr double kLsdSqrtEpsilon = 1e-12;

template <typename Real>
struct LossValue {
  double value = 0.0;
  Tensor<Real> grad;  // d loss / d est, same shape as est
};

// Log-spectral distance over {frames, bins} grids:
// (1/M) sum_m sqrt((1/K) sum_k (ref - est)^2 + eps). Accumulates in double.
template <typename Real>
LossValue<Real> lsd_loss(const Tensor<Real>& est, const Tensor<Real>& ref,
                         double eps = kLsdSqrtEpsilon);

// Value only, same arithmetic as lsd_loss.
template <typename Real>
double lsd_value(const Tensor<Real>& est, const Tensor<Real>& ref, double eps = kLsdSqrtEpsilon);

}  // namespace snnse::engine
