#include "snnse/engine/shape_ops.hpp"

namespace snnse::engine {
namespace {

template <typename Real>
void require_map(const Tensor<Real>& x, const char* what) {
  if (x.rank() != 2) throw ShapeError(std::string(what) + ": expected {L, C}, got " + to_string(x.shape()));
}

}  // namespace

template <typename Real>
Tensor<Real> nearest_upsample2(const Tensor<Real>& x) {
  require_map(x, "upsample2");
  const std::size_t len = x.dim(0), ch = x.dim(1);
  Tensor<Real> y({2 * len, ch});
  for (std::size_t i = 0; i < len; ++i) {
    const Real* src = x.data() + i * ch;
    std::copy_n(src, ch, y.data() + (2 * i) * ch);
    std::copy_n(src, ch, y.data() + (2 * i + 1) * ch);
  }
  return y;
}

template <typename Real>
Tensor<Real> nearest_upsample2_backward(const Tensor<Real>& upstream) {
  require_map(upstream, "upsample2 backward");
  if (upstream.dim(0) % 2 != 0) throw ShapeError("upsample2 backward: odd length");
  const std::size_t len = upstream.dim(0) / 2, ch = upstream.dim(1);
  Tensor<Real> g({len, ch});
  for (std::size_t i = 0; i < len; ++i) {
    const Real* a = upstream.data() + (2 * i) * ch;
    const Real* b = a + ch;
    Real* out = g.data() + i * ch;
    for (std::size_t c = 0; c < ch; ++c) out[c] = a[c] + b[c];
  }
  return g;
}

template <typename Real>
Tensor<Real> trailing_crop(const Tensor<Real>& x, std::size_t length) {
  require_map(x, "crop");
  if (length > x.dim(0)) {
    throw ShapeError("crop to " + std::to_string(length) + " exceeds length " +
                     std::to_string(x.dim(0)));
  }
  const std::size_t ch = x.dim(1);
  std::vector<Real> v(x.data(), x.data() + length * ch);
  return Tensor<Real>({length, ch}, std::move(v));
}

template <typename Real>
Tensor<Real> trailing_crop_backward(const Tensor<Real>& upstream, std::size_t original_length) {
  require_map(upstream, "crop backward");
  if (original_length < upstream.dim(0)) throw ShapeError("crop backward: original shorter");
  Tensor<Real> g({original_length, upstream.dim(1)});
  std::copy(upstream.values().begin(), upstream.values().end(), g.data());
  return g;
}

template <typename Real>
Tensor<Real> channel_concat(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_map(a, "concat");
  require_map(b, "concat");
  if (a.dim(0) != b.dim(0)) {
    throw ShapeError("concat lengths differ: " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  const std::size_t len = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  Tensor<Real> y({len, ca + cb});
  for (std::size_t i = 0; i < len; ++i) {
    Real* out = y.data() + i * (ca + cb);
    std::copy_n(a.data() + i * ca, ca, out);
    std::copy_n(b.data() + i * cb, cb, out + ca);
  }
  return y;
}

template <typename Real>
std::pair<Tensor<Real>, Tensor<Real>> channel_concat_backward(const Tensor<Real>& upstream,
                                                              std::size_t split) {
  require_map(upstream, "concat backward");
  const std::size_t len = upstream.dim(0), ch = upstream.dim(1);
  if (split > ch) throw ShapeError("concat backward: split beyond channel count");
  Tensor<Real> ga({len, split}), gb({len, ch - split});
  for (std::size_t i = 0; i < len; ++i) {
    const Real* in = upstream.data() + i * ch;
    std::copy_n(in, split, ga.data() + i * split);
    std::copy_n(in + split, ch - split, gb.data() + i * (ch - split));
  }
  return {std::move(ga), std::move(gb)};
}

template <typename Real>
Tensor<Real> affine(const Tensor<Real>& x, Real scale, Real shift) {
  Tensor<Real> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * scale + shift;
  return y;
}

#define SNNSE_INSTANTIATE(Real)                                                             \
  template Tensor<Real> nearest_upsample2(const Tensor<Real>&);                             \
  template Tensor<Real> nearest_upsample2_backward(const Tensor<Real>&);                    \
  template Tensor<Real> trailing_crop(const Tensor<Real>&, std::size_t);                    \
  template Tensor<Real> trailing_crop_backward(const Tensor<Real>&, std::size_t);           \
  template Tensor<Real> channel_concat(const Tensor<Real>&, const Tensor<Real>&);           \
  template std::pair<Tensor<Real>, Tensor<Real>> channel_concat_backward(const Tensor<Real>&, \
                                                                         std::size_t);      \
  template Tensor<Real> affine(const Tensor<Real>&, Real, Real);
SNNSE_INSTANTIATE(float)
SNNSE_INSTANTIATE(double)
#undef SNNSE_INSTANTIATE

}  // namespace snnse::engine
