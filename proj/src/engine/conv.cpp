#include "snnse/engine/conv.hpp"

#include <cstdint>
#include <string>
#include <vector>
#include <utility>

namespace snnse::engine {
namespace {

template <typename Real>
inline void axpy(std::size_t n, Real a, const Real* __restrict x, Real* __restrict y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

// Four 8-lane accumulators reduced in a fixed order; reproducible.
template <typename Real>
inline Real dot(std::size_t n, const Real* __restrict a, const Real* __restrict b) {
  Real a0[8] = {}, a1[8] = {}, a2[8] = {}, a3[8] = {};
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    for (int j = 0; j < 8; ++j) a0[j] += a[i + j] * b[i + j];
    for (int j = 0; j < 8; ++j) a1[j] += a[i + 8 + j] * b[i + 8 + j];
    for (int j = 0; j < 8; ++j) a2[j] += a[i + 16 + j] * b[i + 16 + j];
    for (int j = 0; j < 8; ++j) a3[j] += a[i + 24 + j] * b[i + 24 + j];
  }
  for (; i + 8 <= n; i += 8) {
    for (int j = 0; j < 8; ++j) a0[j] += a[i + j] * b[i + j];
  }
  Real tail = 0;
  for (; i < n; ++i) tail += a[i] * b[i];
  for (int j = 0; j < 8; ++j) a0[j] = (a0[j] + a1[j]) + (a2[j] + a3[j]);
  return ((a0[0] + a0[1]) + (a0[2] + a0[3])) + ((a0[4] + a0[5]) + (a0[6] + a0[7])) + tail;
}

// Wide outputs use per-row dot products; narrow ones a transposed copy.
constexpr std::size_t kDotMinOutChannels = 128;

// CSR-style index of the nonzero entries of each row of a {L, C} map.
struct ActiveColumns {
  std::vector<std::uint32_t> offsets;  // L + 1
  std::vector<std::uint32_t> columns;
};

template <typename Real>
ActiveColumns nonzero_columns(const Tensor<Real>& x) {
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  ActiveColumns a;
  a.offsets.reserve(rows + 1);
  a.offsets.push_back(0);
  for (std::size_t r = 0; r < rows; ++r) {
    const Real* xr = x.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      if (xr[c] != Real(0)) a.columns.push_back(static_cast<std::uint32_t>(c));
    }
    a.offsets.push_back(static_cast<std::uint32_t>(a.columns.size()));
  }
  return a;
}

template <typename Real>
void check_conv_shapes(const Tensor<Real>& x, const Tensor<Real>& w, const ConvGeometry& g) {
  g.validate();
  if (x.rank() != 2) throw ShapeError("conv input must be {L, C}, got " + to_string(x.shape()));
  if (w.rank() != 3 || w.dim(0) != static_cast<std::size_t>(g.kernel) || w.dim(1) != x.dim(1)) {
    throw ShapeError("conv weight " + to_string(w.shape()) + " incompatible with input " +
                     to_string(x.shape()) + " and kernel " + std::to_string(g.kernel));
  }
}

// Input row read by output position o at tap kk (valid inside tap_range).
inline std::size_t input_index(const ConvGeometry& g, std::size_t o, int kk) {
  return static_cast<std::size_t>(static_cast<long>(o) * g.stride - g.pad() + kk);
}

// Output positions [begin, end) whose tap kk lands inside the input.
inline std::pair<std::size_t, std::size_t> tap_range(const ConvGeometry& g, int kk,
                                                     std::size_t in_len, std::size_t out_len) {
  const long offset = kk - static_cast<long>(g.pad());
  long begin = 0;
  while (begin < static_cast<long>(out_len) && begin * g.stride + offset < 0) ++begin;
  long end = static_cast<long>(out_len);
  while (end > begin && (end - 1) * g.stride + offset >= static_cast<long>(in_len)) --end;
  return {static_cast<std::size_t>(begin), static_cast<std::size_t>(end)};
}

}  // namespace

std::size_t ConvGeometry::output_length(std::size_t input_length) const {
  const long span = static_cast<long>(input_length) + 2 * pad() - kernel;
  if (span < 0) return 0;
  return static_cast<std::size_t>(span / stride + 1);
}

void ConvGeometry::validate() const {
  if (kernel <= 0 || kernel % 2 == 0) {
    throw ShapeError("kernel=" + std::to_string(kernel) + " (odd kernel required)");
  }
  if (stride != 1 && stride != 2) {
    throw ShapeError("stride=" + std::to_string(stride) + " (1 or 2 required)");
  }
}

template <typename Real>
Tensor<Real> conv1d_forward(const Tensor<Real>& x, const Tensor<Real>& w, const Tensor<Real>& b,
                            const ConvGeometry& g) {
  check_conv_shapes(x, w, g);
  const std::size_t in_len = x.dim(0);
  const std::size_t cin = x.dim(1);
  const std::size_t cout = w.dim(2);
  require_shape(b, {cout}, "conv bias");
  const std::size_t out_len = g.output_length(in_len);
  if (out_len == 0) throw ShapeError("conv output would be empty");

  Tensor<Real> y({out_len, cout});
  for (std::size_t o = 0; o < out_len; ++o) std::copy_n(b.data(), cout, y.data() + o * cout);
  const auto active = nonzero_columns(x);
  for (int kk = 0; kk < g.kernel; ++kk) {
    const auto [o_begin, o_end] = tap_range(g, kk, in_len, out_len);
    const Real* wk = w.data() + static_cast<std::size_t>(kk) * cin * cout;
    for (std::size_t o = o_begin; o < o_end; ++o) {
      const std::size_t i = input_index(g, o, kk);
      const Real* xi = x.data() + i * cin;
      Real* yo = y.data() + o * cout;
      for (std::uint32_t k = active.offsets[i]; k < active.offsets[i + 1]; ++k) {
        const std::size_t ci = active.columns[k];
        axpy(cout, xi[ci], wk + ci * cout, yo);
      }
    }
  }
  return y;
}

template <typename Real>
void conv1d_backward_accumulate(const Tensor<Real>& upstream, const Tensor<Real>& x,
                                const Tensor<Real>& w, const ConvGeometry& g, Tensor<Real>* dx,
                                Tensor<Real>* dw, Tensor<Real>* db) {
  check_conv_shapes(x, w, g);
  const std::size_t in_len = x.dim(0);
  const std::size_t cin = x.dim(1);
  const std::size_t cout = w.dim(2);
  const std::size_t out_len = g.output_length(in_len);
  require_shape(upstream, {out_len, cout}, "conv upstream gradient");
  if (dx) require_shape(*dx, x.shape(), "conv dx");
  if (dw) require_shape(*dw, w.shape(), "conv dw");
  if (db) require_shape(*db, {cout}, "conv db");

  if (db) {
    for (std::size_t o = 0; o < out_len; ++o) {
      const Real* go = upstream.data() + o * cout;
      for (std::size_t co = 0; co < cout; ++co) (*db)[co] += go[co];
    }
  }
  if (dw) {
    const auto active = nonzero_columns(x);
    for (int kk = 0; kk < g.kernel; ++kk) {
      const auto [o_begin, o_end] = tap_range(g, kk, in_len, out_len);
      Real* dwk = dw->data() + static_cast<std::size_t>(kk) * cin * cout;
      for (std::size_t o = o_begin; o < o_end; ++o) {
        const std::size_t i = input_index(g, o, kk);
        const Real* xi = x.data() + i * cin;
        const Real* go = upstream.data() + o * cout;
        for (std::uint32_t k = active.offsets[i]; k < active.offsets[i + 1]; ++k) {
          const std::size_t ci = active.columns[k];
          axpy(cout, xi[ci], go, dwk + ci * cout);
        }
      }
    }
  }
  if (dx && cout >= kDotMinOutChannels) {
    for (int kk = 0; kk < g.kernel; ++kk) {
      const auto [o_begin, o_end] = tap_range(g, kk, in_len, out_len);
      const Real* wk = w.data() + static_cast<std::size_t>(kk) * cin * cout;
      for (std::size_t o = o_begin; o < o_end; ++o) {
        Real* dxi = dx->data() + input_index(g, o, kk) * cin;
        const Real* go = upstream.data() + o * cout;
        for (std::size_t ci = 0; ci < cin; ++ci) dxi[ci] += dot(cout, wk + ci * cout, go);
      }
    }
  } else if (dx) {
    // Transposed taps {k, C_out, C_in} turn each row update into axpys.
    thread_local std::vector<Real> wt;
    wt.resize(w.size());
    for (int kk = 0; kk < g.kernel; ++kk) {
      const Real* src = w.data() + static_cast<std::size_t>(kk) * cin * cout;
      Real* dst = wt.data() + static_cast<std::size_t>(kk) * cin * cout;
      for (std::size_t ci = 0; ci < cin; ++ci) {
        for (std::size_t co = 0; co < cout; ++co) dst[co * cin + ci] = src[ci * cout + co];
      }
    }
    for (int kk = 0; kk < g.kernel; ++kk) {
      const auto [o_begin, o_end] = tap_range(g, kk, in_len, out_len);
      const Real* wtk = wt.data() + static_cast<std::size_t>(kk) * cin * cout;
      for (std::size_t o = o_begin; o < o_end; ++o) {
        Real* dxi = dx->data() + input_index(g, o, kk) * cin;
        const Real* go = upstream.data() + o * cout;
        for (std::size_t co = 0; co < cout; ++co) {
          if (go[co] == Real(0)) continue;
          axpy(cin, go[co], wtk + co * cin, dxi);
        }
      }
    }
  }
}

template <typename Real>
ConvGradients<Real> conv1d_backward(const Tensor<Real>& upstream, const Tensor<Real>& x,
                                    const Tensor<Real>& w, const ConvGeometry& g) {
  ConvGradients<Real> out{Tensor<Real>(x.shape()), Tensor<Real>(w.shape()),
                          Tensor<Real>({w.rank() == 3 ? w.dim(2) : 0})};
  conv1d_backward_accumulate(upstream, x, w, g, &out.dx, &out.dw, &out.db);
  return out;
}

#define SNNSE_INSTANTIATE(Real)                                                               \
  template Tensor<Real> conv1d_forward(const Tensor<Real>&, const Tensor<Real>&,              \
                                       const Tensor<Real>&, const ConvGeometry&);             \
  template void conv1d_backward_accumulate(const Tensor<Real>&, const Tensor<Real>&,          \
                                           const Tensor<Real>&, const ConvGeometry&,          \
                                           Tensor<Real>*, Tensor<Real>*, Tensor<Real>*);      \
  template ConvGradients<Real> conv1d_backward(const Tensor<Real>&, const Tensor<Real>&,      \
                                               const Tensor<Real>&, const ConvGeometry&);
SNNSE_INSTANTIATE(float)
SNNSE_INSTANTIATE(double)
#undef SNNSE_INSTANTIATE

}  // namespace snnse::engine
