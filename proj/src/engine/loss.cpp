#include "snnse/engine/loss.hpp"

#include <cmath>

namespace snnse::engine {

template <typename Real>
LossValue<Real> lsd_loss(const Tensor<Real>& est, const Tensor<Real>& ref, double eps) {
  if (est.shape() != ref.shape() || est.rank() != 2) {
    throw ShapeError("lsd: est " + to_string(est.shape()) + " vs ref " + to_string(ref.shape()));
  }
  const std::size_t frames = est.dim(0), bins = est.dim(1);
  if (frames == 0 || bins == 0) throw ShapeError("lsd: empty spectrogram");

  LossValue<Real> out{0.0, Tensor<Real>(est.shape())};
  double total = 0.0;
  for (std::size_t m = 0; m < frames; ++m) {
    double sq = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double d = static_cast<double>(ref.at(m, k)) - static_cast<double>(est.at(m, k));
      sq += d * d;
    }
    const double rms = std::sqrt(sq / bins + eps);
    total += rms;
    // d rms / d est = -(ref - est) / (K rms); then the 1/M frame average.
    const double scale = -1.0 / (static_cast<double>(bins) * rms * static_cast<double>(frames));
    for (std::size_t k = 0; k < bins; ++k) {
      const double d = static_cast<double>(ref.at(m, k)) - static_cast<double>(est.at(m, k));
      out.grad.at(m, k) = static_cast<Real>(scale * d);
    }
  }
  out.value = total / frames;
  return out;
}

template <typename Real>
double lsd_value(const Tensor<Real>& est, const Tensor<Real>& ref, double eps) {
  if (est.shape() != ref.shape() || est.rank() != 2) {
    throw ShapeError("lsd: est " + to_string(est.shape()) + " vs ref " + to_string(ref.shape()));
  }
  const std::size_t frames = est.dim(0), bins = est.dim(1);
  if (frames == 0 || bins == 0) throw ShapeError("lsd: empty spectrogram");
  double total = 0.0;
  for (std::size_t m = 0; m < frames; ++m) {
    double sq = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double d = static_cast<double>(ref.at(m, k)) - static_cast<double>(est.at(m, k));
      sq += d * d;
    }
    total += std::sqrt(sq / bins + eps);
  }
  return total / frames;
}

template double lsd_value(const Tensor<float>&, const Tensor<float>&, double);
template double lsd_value(const Tensor<double>&, const Tensor<double>&, double);
template LossValue<float> lsd_loss(const Tensor<float>&, const Tensor<float>&, double);
template LossValue<double> lsd_loss(const Tensor<double>&, const Tensor<double>&, double);

}  // namespace snnse::engine
