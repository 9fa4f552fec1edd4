#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "snnse/engine/tensor.hpp"

namespace snnse::engine {

using VarId = std::size_t;

// Reverse-mode record of tensor-valued primitives. Nodes are appended in
// execution order, so the record is topologically sorted by construction.
// Parameters are bound by reference: their values are not copied, and their
// gradients accumulate into caller-owned buffers.
template <typename Real>
class Tape {
 public:
  using Backward = std::function<void(Tape&)>;

  VarId constant(Tensor<Real> value);
  // A leaf whose gradient is tracked on the tape (read it with grad()).
  VarId input(Tensor<Real> value);
  // `value` and `grad` must outlive the tape; grad must have value's shape.
  VarId parameter(const Tensor<Real>& value, Tensor<Real>& grad);

  // Creates the output of a primitive. requires_grad should be true iff
  // some input of the producing node requires it.
  VarId emit(Tensor<Real> value, bool requires_grad);
  void record(std::vector<VarId> inputs, std::vector<VarId> outputs, Backward backward);

  const Tensor<Real>& value(VarId id) const;
  bool requires_grad(VarId id) const { return vars_.at(id).requires_grad; }
  // Zero tensor if no gradient reached the variable.
  Tensor<Real> grad(VarId id) const;
  // Non-null iff a gradient has been accumulated for id.
  const Tensor<Real>* grad_if_any(VarId id) const;
  // Lazily allocated (zero-filled) gradient buffer. For use in backward fns.
  Tensor<Real>& grad_buffer(VarId id);

  // Seeds d loss / d loss = 1 for a single-element variable, then visits
  // every node once in reverse order. Throws InternalError if a node reads
  // a variable produced at or after itself.
  void backward(VarId loss);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t var_count() const { return vars_.size(); }

  // Test hook: overwrite a stored value in place.
  Tensor<Real>& mutable_value_for_testing(VarId id);

 private:
  struct Var {
    Tensor<Real> owned;
    const Tensor<Real>* external = nullptr;
    Tensor<Real>* external_grad = nullptr;
    Tensor<Real> grad;
    bool has_grad = false;
    bool requires_grad = false;
    std::optional<std::size_t> producer;
  };
  struct Node {
    std::vector<VarId> inputs;
    std::vector<VarId> outputs;
    Backward backward;
  };

  std::vector<Var> vars_;
  std::vector<Node> nodes_;
};

}  // namespace snnse::engine
