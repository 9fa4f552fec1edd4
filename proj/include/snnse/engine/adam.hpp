#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "snnse/engine/tensor.hpp"

namespace snnse::engine {

struct AdamConfig {
  double learning_rate = 0.002;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
};

template <typename Real>
struct AdamState {
  std::vector<Tensor<Real>> first_moment;
  std::vector<Tensor<Real>> second_moment;
  std::uint64_t step = 0;
};

// Bias-corrected Adam over a list of parameter tensors. Moments are created
// zero-filled on the first step. A non-finite gradient aborts the whole
// step with NumericError before anything is modified.
template <typename Real>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(std::span<Tensor<Real>* const> params, std::span<const Tensor<Real>* const> grads);

  const AdamConfig& config() const { return config_; }
  AdamState<Real>& state() { return state_; }
  const AdamState<Real>& state() const { return state_; }

 private:
  AdamConfig config_;
  AdamState<Real> state_;
};

}  // namespace snnse::engine
