#include "snnse/engine/tensor.hpp"

#include <cmath>

namespace snnse::engine {

std::string to_string(const Shape& shape) {
  std::string s = "{";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "}";
}

template <typename Real>
void check_finite(const Tensor<Real>& t, const char* what) {
  for (Real v : t.values()) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
  }
}

template <typename Real>
void accumulate(Tensor<Real>& dst, const Tensor<Real>& src) {
  if (dst.shape() != src.shape()) {
    throw ShapeError("accumulate " + to_string(src.shape()) + " into " + to_string(dst.shape()));
  }
  Real* d = dst.data();
  const Real* s = src.data();
  const std::size_t n = dst.size();
  for (std::size_t i = 0; i < n; ++i) d[i] += s[i];
}

template void check_finite(const Tensor<float>&, const char*);
template void check_finite(const Tensor<double>&, const char*);
template void accumulate(Tensor<float>&, const Tensor<float>&);
template void accumulate(Tensor<double>&, const Tensor<double>&);

}  // namespace snnse::engine
