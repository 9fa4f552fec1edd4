#include "snnse/engine/tape.hpp"

#include <string>

namespace snnse::engine {

template <typename Real>
VarId Tape<Real>::constant(Tensor<Real> value) {
  Var v;
  v.owned = std::move(value);
  vars_.push_back(std::move(v));
  return vars_.size() - 1;
}

template <typename Real>
VarId Tape<Real>::input(Tensor<Real> value) {
  Var v;
  v.owned = std::move(value);
  v.requires_grad = true;
  vars_.push_back(std::move(v));
  return vars_.size() - 1;
}

template <typename Real>
VarId Tape<Real>::parameter(const Tensor<Real>& value, Tensor<Real>& grad) {
  if (grad.shape() != value.shape()) {
    throw ShapeError("parameter gradient " + to_string(grad.shape()) + " for value " +
                     to_string(value.shape()));
  }
  Var v;
  v.external = &value;
  v.external_grad = &grad;
  v.requires_grad = true;
  vars_.push_back(std::move(v));
  return vars_.size() - 1;
}

template <typename Real>
VarId Tape<Real>::emit(Tensor<Real> value, bool requires_grad) {
  Var v;
  v.owned = std::move(value);
  v.requires_grad = requires_grad;
  vars_.push_back(std::move(v));
  return vars_.size() - 1;
}

template <typename Real>
void Tape<Real>::record(std::vector<VarId> inputs, std::vector<VarId> outputs, Backward backward) {
  const std::size_t index = nodes_.size();
  for (VarId out : outputs) {
    auto& var = vars_.at(out);
    if (var.producer) throw InternalError("variable " + std::to_string(out) + " produced twice");
    var.producer = index;
  }
  nodes_.push_back({std::move(inputs), std::move(outputs), std::move(backward)});
}

template <typename Real>
const Tensor<Real>& Tape<Real>::value(VarId id) const {
  const auto& v = vars_.at(id);
  return v.external ? *v.external : v.owned;
}

template <typename Real>
Tensor<Real>& Tape<Real>::mutable_value_for_testing(VarId id) {
  auto& v = vars_.at(id);
  if (v.external) throw InternalError("cannot mutate a bound parameter through the tape");
  return v.owned;
}

template <typename Real>
Tensor<Real> Tape<Real>::grad(VarId id) const {
  if (const auto* g = grad_if_any(id)) return *g;
  return Tensor<Real>(value(id).shape());
}

template <typename Real>
const Tensor<Real>* Tape<Real>::grad_if_any(VarId id) const {
  const auto& v = vars_.at(id);
  if (v.external_grad) return v.external_grad;
  return v.has_grad ? &v.grad : nullptr;
}

template <typename Real>
Tensor<Real>& Tape<Real>::grad_buffer(VarId id) {
  auto& v = vars_.at(id);
  if (v.external_grad) return *v.external_grad;
  if (!v.has_grad) {
    v.grad = Tensor<Real>(value(id).shape());
    v.has_grad = true;
  }
  return v.grad;
}

template <typename Real>
void Tape<Real>::backward(VarId loss) {
  if (value(loss).size() != 1) throw ShapeError("backward: loss must be a single value");
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    for (VarId in : nodes_[n].inputs) {
      const auto& producer = vars_.at(in).producer;
      if (producer && *producer >= n) {
        throw InternalError("tape cycle: node " + std::to_string(n) + " reads variable " +
                            std::to_string(in) + " produced by node " + std::to_string(*producer));
      }
    }
  }
  if (!vars_.at(loss).requires_grad) return;
  grad_buffer(loss)[0] += Real(1);
  for (std::size_t n = nodes_.size(); n-- > 0;) {
    const Node& node = nodes_[n];
    bool reached = false;
    for (VarId out : node.outputs) {
      const auto& v = vars_[out];
      if (v.has_grad || v.external_grad) reached = true;
    }
    if (reached) node.backward(*this);
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace snnse::engine
