#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "snnse/engine/tensor.hpp"

namespace snnse::testing {

using engine::Tensor;

// ||a - b|| / max(||a||, ||b||, floor) over all entries.
inline double relative_error(const Tensor<double>& a, const Tensor<double>& b, double floor = 1e-12) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), floor});
}

// Central differences of `loss` with respect to every entry of `x`.
inline Tensor<double> numeric_gradient(Tensor<double>& x, const std::function<double()>& loss,
                                       double h = 1e-6) {
  Tensor<double> g(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = loss();
    x[i] = keep - h;
    const double down = loss();
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline Tensor<double> random_tensor(engine::Shape shape, std::mt19937_64& rng, double stddev = 1.0,
                                    double mean = 0.0) {
  std::normal_distribution<double> d(mean, stddev);
  Tensor<double> t(std::move(shape));
  for (auto& v : t.storage()) v = d(rng);
  return t;
}

// Fixed random weighting turning a tensor into a scalar: sum(w * y).
inline double weighted_sum(const Tensor<double>& y, const Tensor<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

}  // namespace snnse::testing
