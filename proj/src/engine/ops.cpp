#include "snnse/engine/ops.hpp"

#include "snnse/engine/loss.hpp"
#include "snnse/engine/shape_ops.hpp"

namespace snnse::engine {

template <typename Real>
VarId conv1d(Tape<Real>& tape, VarId x, VarId w, VarId b, const ConvGeometry& g) {
  auto y = conv1d_forward(tape.value(x), tape.value(w), tape.value(b), g);
  const bool rg = tape.requires_grad(x) || tape.requires_grad(w) || tape.requires_grad(b);
  const VarId out = tape.emit(std::move(y), rg);
  if (rg) {
    tape.record({x, w, b}, {out}, [x, w, b, out, g](Tape<Real>& t) {
      const auto* up = t.grad_if_any(out);
      if (!up) return;
      conv1d_backward_accumulate(*up, t.value(x), t.value(w), g,
                                 t.requires_grad(x) ? &t.grad_buffer(x) : nullptr,
                                 t.requires_grad(w) ? &t.grad_buffer(w) : nullptr,
                                 t.requires_grad(b) ? &t.grad_buffer(b) : nullptr);
    });
  }
  return out;
}

template <typename Real>
VarId upsample2(Tape<Real>& tape, VarId x) {
  const bool rg = tape.requires_grad(x);
  const VarId out = tape.emit(nearest_upsample2(tape.value(x)), rg);
  if (rg) {
    tape.record({x}, {out}, [x, out](Tape<Real>& t) {
      if (const auto* up = t.grad_if_any(out)) {
        accumulate(t.grad_buffer(x), nearest_upsample2_backward(*up));
      }
    });
  }
  return out;
}

template <typename Real>
VarId crop(Tape<Real>& tape, VarId x, std::size_t length) {
  const bool rg = tape.requires_grad(x);
  const std::size_t original = tape.value(x).dim(0);
  const VarId out = tape.emit(trailing_crop(tape.value(x), length), rg);
  if (rg) {
    tape.record({x}, {out}, [x, out, original](Tape<Real>& t) {
      if (const auto* up = t.grad_if_any(out)) {
        accumulate(t.grad_buffer(x), trailing_crop_backward(*up, original));
      }
    });
  }
  return out;
}

template <typename Real>
VarId concat_channels(Tape<Real>& tape, VarId a, VarId b) {
  const bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  const std::size_t split = tape.value(a).dim(1);
  const VarId out = tape.emit(channel_concat(tape.value(a), tape.value(b)), rg);
  if (rg) {
    tape.record({a, b}, {out}, [a, b, out, split](Tape<Real>& t) {
      const auto* up = t.grad_if_any(out);
      if (!up) return;
      auto [ga, gb] = channel_concat_backward(*up, split);
      if (t.requires_grad(a)) accumulate(t.grad_buffer(a), ga);
      if (t.requires_grad(b)) accumulate(t.grad_buffer(b), gb);
    });
  }
  return out;
}

template <typename Real>
VarId scale_shift(Tape<Real>& tape, VarId x, Real scale, Real shift) {
  const bool rg = tape.requires_grad(x);
  const VarId out = tape.emit(affine(tape.value(x), scale, shift), rg);
  if (rg) {
    tape.record({x}, {out}, [x, out, scale](Tape<Real>& t) {
      if (const auto* up = t.grad_if_any(out)) {
        accumulate(t.grad_buffer(x), affine(*up, scale, Real(0)));
      }
    });
  }
  return out;
}

template <typename Real>
VarId select_frame(Tape<Real>& tape, VarId frames, std::size_t m) {
  const auto& src = tape.value(frames);
  if (src.rank() != 2 || m >= src.dim(0)) throw ShapeError("select_frame out of range");
  const std::size_t bins = src.dim(1);
  std::vector<Real> row(src.data() + m * bins, src.data() + (m + 1) * bins);
  const bool rg = tape.requires_grad(frames);
  const VarId out = tape.emit(Tensor<Real>({bins, 1}, std::move(row)), rg);
  if (rg) {
    tape.record({frames}, {out}, [frames, out, m, bins](Tape<Real>& t) {
      const auto* up = t.grad_if_any(out);
      if (!up) return;
      Real* dst = t.grad_buffer(frames).data() + m * bins;
      for (std::size_t k = 0; k < bins; ++k) dst[k] += (*up)[k];
    });
  }
  return out;
}

template <typename Real>
VarId stack_frames(Tape<Real>& tape, std::span<const VarId> frames) {
  if (frames.empty()) throw ShapeError("stack_frames: no frames");
  const std::size_t bins = tape.value(frames[0]).size();
  Tensor<Real> y({frames.size(), bins});
  bool rg = false;
  for (std::size_t m = 0; m < frames.size(); ++m) {
    const auto& f = tape.value(frames[m]);
    if (f.size() != bins) throw ShapeError("stack_frames: ragged frames");
    std::copy_n(f.data(), bins, y.data() + m * bins);
    rg = rg || tape.requires_grad(frames[m]);
  }
  const VarId out = tape.emit(std::move(y), rg);
  if (rg) {
    std::vector<VarId> inputs(frames.begin(), frames.end());
    tape.record(inputs, {out}, [inputs, out, bins](Tape<Real>& t) {
      const auto* up = t.grad_if_any(out);
      if (!up) return;
      for (std::size_t m = 0; m < inputs.size(); ++m) {
        if (!t.requires_grad(inputs[m])) continue;
        Real* dst = t.grad_buffer(inputs[m]).data();
        for (std::size_t k = 0; k < bins; ++k) dst[k] += (*up)[m * bins + k];
      }
    });
  }
  return out;
}

template <typename Real>
SpikeNodeGradient<Real> spike_node_backward(Real grad_spike, Real grad_membrane_next,
                                            Real membrane, Real threshold,
                                            const core::SpikeOptions& options) {
  const Real offset = membrane - threshold;
  const Real spike = core::spike_function(offset, options);
  const Real surrogate =
      static_cast<Real>(core::arctan_surrogate_grad(static_cast<double>(offset), options.surrogate));
  Real through_spike = grad_spike;
  if (!options.detach_reset) through_spike -= threshold * grad_membrane_next;
  const Real reset = spike == Real(0) ? Real(0) : spike * grad_membrane_next;
  return {through_spike * surrogate, -through_spike * surrogate - reset};
}

template <typename Real>
LifVars lif_step(Tape<Real>& tape, VarId current, VarId membrane, VarId drive, VarId alpha,
                 VarId beta, VarId threshold, const core::SpikeOptions& options) {
  core::LifState<Real> state{tape.value(current), tape.value(membrane)};
  core::LifParams<Real> params{tape.value(alpha), tape.value(beta), tape.value(threshold)};
  auto spikes = core::lif_step(state, params, tape.value(drive), options);

  bool rg = false;
  for (VarId v : {current, membrane, drive, alpha, beta, threshold}) rg = rg || tape.requires_grad(v);
  LifVars out{tape.emit(std::move(state.current), rg), tape.emit(std::move(state.membrane), rg),
              tape.emit(std::move(spikes), rg)};
  if (!rg) return out;

  tape.record(
      {current, membrane, drive, alpha, beta, threshold}, {out.current, out.membrane, out.spikes},
      [=](Tape<Real>& t) {
        const auto* g_cur = t.grad_if_any(out.current);
        const auto* g_mem = t.grad_if_any(out.membrane);
        const auto* g_spk = t.grad_if_any(out.spikes);
        const auto& i_old = t.value(current);
        const auto& u_old = t.value(membrane);
        const auto& a = t.value(alpha);
        const auto& b = t.value(beta);
        const auto& th = t.value(threshold);
        const std::size_t channels = th.size();
        const std::size_t n = u_old.size();

        Tensor<Real>* d_cur = t.requires_grad(current) ? &t.grad_buffer(current) : nullptr;
        Tensor<Real>* d_mem = t.requires_grad(membrane) ? &t.grad_buffer(membrane) : nullptr;
        Tensor<Real>* d_drive = t.requires_grad(drive) ? &t.grad_buffer(drive) : nullptr;
        std::vector<double> d_alpha(channels, 0.0), d_beta(channels, 0.0), d_th(channels, 0.0);

        for (std::size_t j = 0; j < n; ++j) {
          const std::size_t c = j % channels;
          const Real gi = g_cur ? (*g_cur)[j] : Real(0);
          const Real gu = g_mem ? (*g_mem)[j] : Real(0);
          const Real gs = g_spk ? (*g_spk)[j] : Real(0);
          const auto node = spike_node_backward(gs, gu, u_old[j], th[c], options);
          if (d_mem) (*d_mem)[j] += b[c] * gu + node.membrane;
          if (d_cur) (*d_cur)[j] += a[c] * gi + gu;
          if (d_drive) (*d_drive)[j] += gi;
          d_alpha[c] += static_cast<double>(gi) * i_old[j];
          d_beta[c] += static_cast<double>(gu) * u_old[j];
          d_th[c] += node.threshold;
        }
        auto flush = [&](VarId id, const std::vector<double>& src) {
          if (!t.requires_grad(id)) return;
          auto& dst = t.grad_buffer(id);
          for (std::size_t c = 0; c < channels; ++c) dst[c] += static_cast<Real>(src[c]);
        };
        flush(alpha, d_alpha);
        flush(beta, d_beta);
        flush(threshold, d_th);
      });
  return out;
}

template <typename Real>
VarId leaky_integrate(Tape<Real>& tape, VarId membrane, VarId drive, VarId beta) {
  const auto& u = tape.value(membrane);
  const auto& d = tape.value(drive);
  const auto& b = tape.value(beta);
  require_shape(u, d.shape(), "integrator membrane");
  const std::size_t channels = b.size();
  if (d.rank() != 2 || d.dim(1) != channels) throw ShapeError("integrator beta channel mismatch");
  Tensor<Real> next(d.shape());
  for (std::size_t j = 0; j < next.size(); ++j) next[j] = b[j % channels] * u[j] + d[j];

  const bool rg = tape.requires_grad(membrane) || tape.requires_grad(drive) || tape.requires_grad(beta);
  const VarId out = tape.emit(std::move(next), rg);
  if (rg) {
    tape.record({membrane, drive, beta}, {out}, [=](Tape<Real>& t) {
      const auto* up = t.grad_if_any(out);
      if (!up) return;
      const auto& u_old = t.value(membrane);
      const auto& bt = t.value(beta);
      const std::size_t ch = bt.size();
      if (t.requires_grad(membrane)) {
        auto& g = t.grad_buffer(membrane);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] += bt[j % ch] * (*up)[j];
      }
      if (t.requires_grad(drive)) accumulate(t.grad_buffer(drive), *up);
      if (t.requires_grad(beta)) {
        std::vector<double> acc(ch, 0.0);
        for (std::size_t j = 0; j < u_old.size(); ++j) {
          acc[j % ch] += static_cast<double>((*up)[j]) * u_old[j];
        }
        auto& g = t.grad_buffer(beta);
        for (std::size_t c = 0; c < ch; ++c) g[c] += static_cast<Real>(acc[c]);
      }
    });
  }
  return out;
}

template <typename Real>
VarId lsd(Tape<Real>& tape, VarId est, const Tensor<Real>& ref) {
  auto loss = lsd_loss(tape.value(est), ref);
  const bool rg = tape.requires_grad(est);
  const VarId out = tape.emit(Tensor<Real>({1}, static_cast<Real>(loss.value)), rg);
  if (rg) {
    tape.record({est}, {out}, [est, out, grad = std::move(loss.grad)](Tape<Real>& t) {
      const auto* up = t.grad_if_any(out);
      if (!up) return;
      accumulate(t.grad_buffer(est), affine(grad, (*up)[0], Real(0)));
    });
  }
  return out;
}

#define SNNSE_INSTANTIATE(Real)                                                                 \
  template VarId conv1d(Tape<Real>&, VarId, VarId, VarId, const ConvGeometry&);                 \
  template VarId upsample2(Tape<Real>&, VarId);                                                 \
  template VarId crop(Tape<Real>&, VarId, std::size_t);                                         \
  template VarId concat_channels(Tape<Real>&, VarId, VarId);                                    \
  template VarId scale_shift(Tape<Real>&, VarId, Real, Real);                                   \
  template VarId select_frame(Tape<Real>&, VarId, std::size_t);                                 \
  template VarId stack_frames(Tape<Real>&, std::span<const VarId>);                             \
  template SpikeNodeGradient<Real> spike_node_backward(Real, Real, Real, Real,                  \
                                                       const core::SpikeOptions&);              \
  template LifVars lif_step(Tape<Real>&, VarId, VarId, VarId, VarId, VarId, VarId,              \
                            const core::SpikeOptions&);                                         \
  template VarId leaky_integrate(Tape<Real>&, VarId, VarId, VarId);                             \
  template VarId lsd(Tape<Real>&, VarId, const Tensor<Real>&);
SNNSE_INSTANTIATE(float)
SNNSE_INSTANTIATE(double)
#undef SNNSE_INSTANTIATE

}  // namespace snnse::engine
