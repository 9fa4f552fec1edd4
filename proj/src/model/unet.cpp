#include "snnse/model/unet.hpp"

#include <cmath>
#include <random>

#include "snnse/engine/clamp.hpp"
#include "snnse/engine/ops.hpp"
#include "snnse/engine/shape_ops.hpp"
#include "snnse/error.hpp"

namespace snnse::model {
namespace {

template <typename Real>
void fill_normal(Tensor<Real>& t, std::mt19937_64& rng, double mean, double std) {
  std::normal_distribution<double> dist(mean, std);
  for (Real& v : t.values()) v = static_cast<Real>(dist(rng));
}

template <typename Real>
core::SpikingLayer<Real> make_spiking(const LayerSpec& spec, std::size_t in_channels,
                                      std::mt19937_64& rng) {
  const auto out = static_cast<std::size_t>(spec.channels);
  core::SpikingLayer<Real> layer{
      core::ConvWeights<Real>::zeros({spec.kernel, spec.stride}, in_channels, out),
      core::LifParams<Real>::uniform(out, 0, 0, 1)};
  fill_normal(layer.conv.weight, rng, 0.0, kWeightStd);
  fill_normal(layer.lif.alpha, rng, kDecayMean, kNeuronParamStd);
  fill_normal(layer.lif.beta, rng, kDecayMean, kNeuronParamStd);
  fill_normal(layer.lif.threshold, rng, kThresholdMean, kNeuronParamStd);
  return layer;
}

template <typename Real>
void copy_row(const Tensor<Real>& frames, std::size_t m, Tensor<Real>& out) {
  const std::size_t bins = frames.dim(1);
  std::copy_n(frames.data() + m * bins, bins, out.data());
}

template <typename Real>
void append_spikes(core::LayerSpikes& dst, const Tensor<Real>& spikes) {
  for (Real v : spikes.values()) dst.values.push_back(static_cast<float>(v));
}

template <typename From, typename To>
core::SpikingLayer<To> cast_layer(const core::SpikingLayer<From>& l) {
  return {{l.conv.geometry, l.conv.weight.template cast<To>(), l.conv.bias.template cast<To>()},
          {l.lif.alpha.template cast<To>(), l.lif.beta.template cast<To>(),
           l.lif.threshold.template cast<To>()}};
}

}  // namespace

void NormalizationStats::validate() const {
  if (!std::isfinite(mean) || !std::isfinite(std) || !(std > 0.0)) {
    throw DomainError("normalization std must be positive and finite");
  }
}

template <typename Real>
Model<Real> Model<Real>::build(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Model m;
  m.config_ = cfg;
  std::mt19937_64 rng(seed);
  std::size_t in = 1;
  for (const auto& spec : cfg.encoder) {
    m.encoder_.push_back(make_spiking<Real>(spec, in, rng));
    in = static_cast<std::size_t>(spec.channels);
  }
  for (std::size_t i = 0; i < cfg.decoder.size(); ++i) {
    m.decoder_.push_back(make_spiking<Real>(cfg.decoder[i], cfg.decoder_in_channels(i), rng));
  }
  const auto last = static_cast<std::size_t>(cfg.decoder.back().channels);
  m.readout_ = {core::ConvWeights<Real>::zeros({cfg.readout_kernel, 1}, last, 1),
                Tensor<Real>({1})};
  fill_normal(m.readout_.conv.weight, rng, 0.0, kWeightStd);
  fill_normal(m.readout_.beta, rng, kDecayMean, kNeuronParamStd);
  m.clamp_neuron_params();
  return m;
}

template <typename Real>
void Model<Real>::set_normalization(const NormalizationStats& stats) {
  stats.validate();
  norm_ = stats;
}

template <typename Real>
std::vector<ParamRef<Tensor<Real>>> Model<Real>::parameters() {
  std::vector<ParamRef<Tensor<Real>>> out;
  auto add_layer = [&](const std::string& prefix, core::SpikingLayer<Real>& l) {
    out.push_back({prefix + ".weight", ParamKind::kWeight, &l.conv.weight});
    out.push_back({prefix + ".bias", ParamKind::kBias, &l.conv.bias});
    out.push_back({prefix + ".alpha", ParamKind::kDecay, &l.lif.alpha});
    out.push_back({prefix + ".beta", ParamKind::kDecay, &l.lif.beta});
    out.push_back({prefix + ".threshold", ParamKind::kThreshold, &l.lif.threshold});
  };
  for (std::size_t i = 0; i < encoder_.size(); ++i) add_layer("encoder." + std::to_string(i), encoder_[i]);
  for (std::size_t i = 0; i < decoder_.size(); ++i) add_layer("decoder." + std::to_string(i), decoder_[i]);
  out.push_back({"readout.weight", ParamKind::kWeight, &readout_.conv.weight});
  out.push_back({"readout.bias", ParamKind::kBias, &readout_.conv.bias});
  out.push_back({"readout.beta", ParamKind::kDecay, &readout_.beta});
  return out;
}

template <typename Real>
std::vector<ParamRef<const Tensor<Real>>> Model<Real>::parameters() const {
  std::vector<ParamRef<const Tensor<Real>>> out;
  for (auto& p : const_cast<Model*>(this)->parameters()) out.push_back({p.name, p.kind, p.value});
  return out;
}

template <typename Real>
std::vector<Tensor<Real>> Model<Real>::zero_gradients() const {
  std::vector<Tensor<Real>> out;
  for (const auto& p : parameters()) out.emplace_back(p.value->shape());
  return out;
}

template <typename Real>
std::size_t Model<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value->size();
  return n;
}

template <typename Real>
void Model<Real>::clamp_neuron_params() {
  for (auto& l : encoder_) engine::clamp_neuron_params(l.lif);
  for (auto& l : decoder_) engine::clamp_neuron_params(l.lif);
  engine::clamp_decay(readout_.beta);
}

template <typename Real>
template <typename Other>
Model<Other> Model<Real>::cast() const {
  Model<Other> m;
  m.config_ = config_;
  m.norm_ = norm_;
  for (const auto& l : encoder_) m.encoder_.push_back(cast_layer<Real, Other>(l));
  for (const auto& l : decoder_) m.decoder_.push_back(cast_layer<Real, Other>(l));
  m.readout_ = {{readout_.conv.geometry, readout_.conv.weight.template cast<Other>(),
                 readout_.conv.bias.template cast<Other>()},
                readout_.beta.template cast<Other>()};
  return m;
}

template <typename Real>
core::SpikeRecord Model<Real>::empty_spike_record() const {
  core::SpikeRecord rec;
  const auto enc_len = config_.encoder_lengths();
  const auto dec_len = config_.decoder_lengths();
  const std::size_t n_enc = encoder_.size();
  for (std::size_t i = 0; i < n_enc; ++i) {
    rec.layers.push_back({"enc" + std::to_string(i + 1), enc_len[i], encoder_[i].conv.out_channels(), {}});
  }
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    rec.layers.push_back({"dec" + std::to_string(i + 1), dec_len[i], decoder_[i].conv.out_channels(), {}});
  }
  // enc1 receives the real-valued spectrum (direct encoding), not spikes.
  for (std::size_t i = 1; i < n_enc; ++i) {
    rec.projections.push_back({i - 1, rec.layers[i].name, core::Routing::kDirect, enc_len[i - 1],
                               encoder_[i].conv.geometry, encoder_[i].conv.out_channels()});
  }
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    const std::size_t below = i == 0 ? n_enc - 1 : n_enc + i - 1;
    const std::string& target = rec.layers[n_enc + i].name;
    const auto& g = decoder_[i].conv.geometry;
    const std::size_t out_ch = decoder_[i].conv.out_channels();
    rec.projections.push_back({below, target, core::Routing::kUpsampleCrop, dec_len[i], g, out_ch});
    rec.projections.push_back(
        {config_.skip_source(i), target, core::Routing::kDirect, dec_len[i], g, out_ch});
  }
  rec.projections.push_back({rec.layers.size() - 1, "readout", core::Routing::kDirect,
                             dec_len.back(), readout_.conv.geometry, 1});
  return rec;
}

template <typename Real>
Tensor<Real> Model<Real>::forward(const Tensor<Real>& noisy_lps, core::SpikeRecord* record) const {
  const auto bins = static_cast<std::size_t>(config_.bins);
  if (noisy_lps.rank() != 2 || noisy_lps.dim(1) != bins) {
    throw ShapeError("model expects {frames, " + std::to_string(bins) + "} input, got " +
                     engine::to_string(noisy_lps.shape()));
  }
  const std::size_t frames = noisy_lps.dim(0);
  const auto opts = config_.spike_options();
  const Real in_scale = static_cast<Real>(1.0 / norm_.std);
  const Real in_shift = static_cast<Real>(-norm_.mean / norm_.std);
  const Real out_scale = static_cast<Real>(norm_.std);
  const Real out_shift = static_cast<Real>(norm_.mean);

  const auto enc_len = config_.encoder_lengths();
  const auto dec_len = config_.decoder_lengths();
  std::vector<core::LifState<Real>> enc_state, dec_state;
  for (std::size_t i = 0; i < encoder_.size(); ++i) {
    enc_state.push_back(core::LifState<Real>::zeros(enc_len[i], encoder_[i].conv.out_channels()));
  }
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    dec_state.push_back(core::LifState<Real>::zeros(dec_len[i], decoder_[i].conv.out_channels()));
  }
  Tensor<Real> readout_membrane({bins, 1});
  if (record) *record = empty_spike_record();

  Tensor<Real> est({frames, bins});
  Tensor<Real> frame({bins, 1});
  std::vector<Tensor<Real>> enc_out(encoder_.size());
  for (std::size_t t = 0; t < frames; ++t) {
    copy_row(noisy_lps, t, frame);
    Tensor<Real> h = engine::affine(frame, in_scale, in_shift);
    for (std::size_t i = 0; i < encoder_.size(); ++i) {
      enc_out[i] = core::encoder_layer_forward(h, encoder_[i], enc_state[i], opts);
      h = enc_out[i];
      if (record) append_spikes(record->layers[i], h);
    }
    for (std::size_t i = 0; i < decoder_.size(); ++i) {
      h = core::decoder_layer_forward(h, enc_out[config_.skip_source(i)], decoder_[i], dec_state[i],
                                      opts);
      if (record) append_spikes(record->layers[encoder_.size() + i], h);
    }
    const auto out = engine::affine(core::readout_forward(h, readout_, readout_membrane),
                                    out_scale, out_shift);
    std::copy_n(out.data(), bins, est.data() + t * bins);
  }
  return est;
}

template <typename Real>
dsp::LpsSpectrogram Model<Real>::forward_utterance(const dsp::LpsSpectrogram& noisy,
                                                   core::SpikeRecord* record) const {
  return tensor_to_lps(forward(lps_to_tensor<Real>(noisy), record));
}

template <typename Real>
engine::VarId Model<Real>::forward_graph(engine::Tape<Real>& tape, const Tensor<Real>& noisy_lps,
                                         std::vector<Tensor<Real>>& grads) const {
  using engine::VarId;
  const auto bins = static_cast<std::size_t>(config_.bins);
  if (noisy_lps.rank() != 2 || noisy_lps.dim(1) != bins) {
    throw ShapeError("model expects {frames, " + std::to_string(bins) + "} input, got " +
                     engine::to_string(noisy_lps.shape()));
  }
  const auto params = parameters();
  if (grads.size() != params.size()) throw ShapeError("gradient set does not match model");
  std::vector<VarId> p;
  for (std::size_t i = 0; i < params.size(); ++i) p.push_back(tape.parameter(*params[i].value, grads[i]));
  // Five tensors per spiking layer: weight, bias, alpha, beta, threshold.
  auto layer_param = [&](std::size_t layer, std::size_t which) { return p[layer * 5 + which]; };
  const std::size_t n_enc = encoder_.size();
  const std::size_t readout_base = (n_enc + decoder_.size()) * 5;

  const auto opts = config_.spike_options();
  const Real in_scale = static_cast<Real>(1.0 / norm_.std);
  const Real in_shift = static_cast<Real>(-norm_.mean / norm_.std);
  const Real out_scale = static_cast<Real>(norm_.std);
  const Real out_shift = static_cast<Real>(norm_.mean);

  const auto enc_len = config_.encoder_lengths();
  const auto dec_len = config_.decoder_lengths();
  struct StateVars {
    VarId current, membrane;
  };
  std::vector<StateVars> state;
  auto zero_state = [&](std::size_t len, std::size_t ch) {
    return StateVars{tape.constant(Tensor<Real>({len, ch})), tape.constant(Tensor<Real>({len, ch}))};
  };
  for (std::size_t i = 0; i < n_enc; ++i) state.push_back(zero_state(enc_len[i], encoder_[i].conv.out_channels()));
  for (std::size_t i = 0; i < decoder_.size(); ++i) {
    state.push_back(zero_state(dec_len[i], decoder_[i].conv.out_channels()));
  }
  VarId readout_membrane = tape.constant(Tensor<Real>({bins, 1}));

  const VarId input = tape.constant(noisy_lps);
  std::vector<VarId> outputs;
  std::vector<VarId> enc_out(n_enc);
  auto spiking = [&](std::size_t layer, VarId x, const engine::ConvGeometry& g) {
    const VarId drive = engine::conv1d(tape, x, layer_param(layer, 0), layer_param(layer, 1), g);
    const auto lif = engine::lif_step(tape, state[layer].current, state[layer].membrane, drive,
                                      layer_param(layer, 2), layer_param(layer, 3),
                                      layer_param(layer, 4), opts);
    state[layer] = {lif.current, lif.membrane};
    return lif.spikes;
  };
  for (std::size_t t = 0; t < noisy_lps.dim(0); ++t) {
    VarId h = engine::scale_shift(tape, engine::select_frame(tape, input, t), in_scale, in_shift);
    for (std::size_t i = 0; i < n_enc; ++i) {
      h = spiking(i, h, encoder_[i].conv.geometry);
      enc_out[i] = h;
    }
    for (std::size_t i = 0; i < decoder_.size(); ++i) {
      const VarId skip = enc_out[config_.skip_source(i)];
      const VarId up = engine::crop(tape, engine::upsample2(tape, h), dec_len[i]);
      h = spiking(n_enc + i, engine::concat_channels(tape, up, skip), decoder_[i].conv.geometry);
    }
    const VarId drive = engine::conv1d(tape, h, p[readout_base], p[readout_base + 1],
                                       readout_.conv.geometry);
    readout_membrane = engine::leaky_integrate(tape, readout_membrane, drive, p[readout_base + 2]);
    outputs.push_back(readout_membrane);
  }
  return engine::scale_shift(tape, engine::stack_frames<Real>(tape, outputs), out_scale, out_shift);
}

template <typename Real>
Tensor<Real> lps_to_tensor(const dsp::LpsSpectrogram& lps) {
  std::vector<Real> v(lps.values.begin(), lps.values.end());
  return Tensor<Real>({lps.frames, lps.bins}, std::move(v));
}

template <typename Real>
dsp::LpsSpectrogram tensor_to_lps(const Tensor<Real>& t) {
  dsp::LpsSpectrogram lps(t.dim(0), t.dim(1));
  std::copy(t.values().begin(), t.values().end(), lps.values.begin());
  return lps;
}

template class Model<float>;
template class Model<double>;
template Model<double> Model<float>::cast<double>() const;
template Model<float> Model<double>::cast<float>() const;
template Tensor<float> lps_to_tensor(const dsp::LpsSpectrogram&);
template Tensor<double> lps_to_tensor(const dsp::LpsSpectrogram&);
template dsp::LpsSpectrogram tensor_to_lps(const Tensor<float>&);
template dsp::LpsSpectrogram tensor_to_lps(const Tensor<double>&);

}  // namespace snnse::model
