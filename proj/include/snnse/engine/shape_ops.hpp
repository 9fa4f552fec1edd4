#pragma once

#include "snnse/engine/tensor.hpp"

namespace snnse::engine {

// {L, C} -> {2L, C}; every position duplicated.
template <typename Real>
Tensor<Real> nearest_upsample2(const Tensor<Real>& x);
// Adjoint: sums each duplicated pair.
template <typename Real>
Tensor<Real> nearest_upsample2_backward(const Tensor<Real>& upstream);

// Keeps the first `length` positions.
template <typename Real>
Tensor<Real> trailing_crop(const Tensor<Real>& x, std::size_t length);
// Adjoint: zero-pads back to `original_length`.
template <typename Real>
Tensor<Real> trailing_crop_backward(const Tensor<Real>& upstream, std::size_t original_length);

// {L, Ca} ++ {L, Cb} -> {L, Ca + Cb}, `a` channels first.
template <typename Real>
Tensor<Real> channel_concat(const Tensor<Real>& a, const Tensor<Real>& b);
// Adjoint: splits at channel `split`.
template <typename Real>
std::pair<Tensor<Real>, Tensor<Real>> channel_concat_backward(const Tensor<Real>& upstream,
                                                              std::size_t split);

// y = x * scale + shift.
template <typename Real>
Tensor<Real> affine(const Tensor<Real>& x, Real scale, Real shift);

}  // namespace snnse::engine
