#include "snnse/engine/adam.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "snnse/engine/clamp.hpp"

namespace snnse::engine {

template <typename Real>
void Adam<Real>::step(std::span<Tensor<Real>* const> params,
                      std::span<const Tensor<Real>* const> grads) {
  if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient count mismatch");
  for (std::size_t p = 0; p < params.size(); ++p) {
    require_shape(*grads[p], params[p]->shape(), "adam gradient");
    for (Real g : grads[p]->values()) {
      if (!std::isfinite(g)) {
        throw NumericError("adam: non-finite gradient in parameter #" + std::to_string(p) +
                           "; step aborted");
      }
    }
  }
  if (state_.first_moment.empty()) {
    for (const auto* p : params) {
      state_.first_moment.emplace_back(p->shape());
      state_.second_moment.emplace_back(p->shape());
    }
  }
  if (state_.first_moment.size() != params.size()) {
    throw ShapeError("adam: parameter list changed between steps");
  }

  ++state_.step;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state_.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state_.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Real* value = params[p]->data();
    const Real* grad = grads[p]->data();
    Real* m = state_.first_moment[p].data();
    Real* v = state_.second_moment[p].data();
    for (std::size_t i = 0; i < params[p]->size(); ++i) {
      const double g = grad[i];
      const double mi = b1 * m[i] + (1.0 - b1) * g;
      const double vi = b2 * v[i] + (1.0 - b2) * g * g;
      m[i] = static_cast<Real>(mi);
      v[i] = static_cast<Real>(vi);
      const double m_hat = mi / correction1;
      const double v_hat = vi / correction2;
      value[i] = static_cast<Real>(value[i] -
                                   config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon));
    }
  }
}

template <typename Real>
void clamp_decay(Tensor<Real>& decay) {
  for (Real& v : decay.values()) v = std::clamp(v, Real(0), static_cast<Real>(kMaxDecay));
}

template <typename Real>
void clamp_threshold(Tensor<Real>& threshold) {
  for (Real& v : threshold.values()) v = std::max(v, static_cast<Real>(kMinThreshold));
}

template class Adam<float>;
template class Adam<double>;
template void clamp_decay(Tensor<float>&);
template void clamp_decay(Tensor<double>&);
template void clamp_threshold(Tensor<float>&);
template void clamp_threshold(Tensor<double>&);

}  // namespace snnse::engine
