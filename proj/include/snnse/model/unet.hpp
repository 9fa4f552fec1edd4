#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnse/core/layers.hpp"
#include "snnse/core/spike_stats.hpp"
#include "snnse/dsp/stft.hpp"
#include "snnse/engine/tape.hpp"
#include "snnse/model/config.hpp"

namespace snnse::model {

using engine::Tensor;

// Scalar statistics of the training noisy LPS; inputs are standardized with
// them and the readout is mapped back to raw LPS.
struct NormalizationStats {
  double mean = 0.0;
  double std = 1.0;

  void validate() const;
  bool operator==(const NormalizationStats&) const = default;
};

enum class ParamKind { kWeight, kBias, kDecay, kThreshold };

template <typename Tensor>
struct ParamRef {
  std::string name;
  ParamKind kind;
  Tensor* value;
};

// Initialization distributions.
inline constexpr double kWeightStd = 0.2;
inline constexpr double kDecayMean = 0.05;
inline constexpr double kThresholdMean = 1.0;
inline constexpr double kNeuronParamStd = 0.01;

template <typename Real>
class Model {
 public:
  // Weights ~ N(0, 0.2), biases 0, decays ~ N(0.05, 0.01),
  // thresholds ~ N(1.0, 0.01), then neuron parameters clamped.
  static Model build(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const NormalizationStats& normalization() const { return norm_; }
  void set_normalization(const NormalizationStats& stats);

  // Fixed order: encoder layers, decoder layers, readout.
  std::vector<ParamRef<Tensor<Real>>> parameters();
  std::vector<ParamRef<const Tensor<Real>>> parameters() const;
  std::vector<Tensor<Real>> zero_gradients() const;
  std::size_t parameter_count() const;
  void clamp_neuron_params();

  const std::vector<core::SpikingLayer<Real>>& encoder() const { return encoder_; }
  const std::vector<core::SpikingLayer<Real>>& decoder() const { return decoder_; }
  const core::ReadoutLayer<Real>& readout() const { return readout_; }
  std::vector<core::SpikingLayer<Real>>& encoder() { return encoder_; }
  std::vector<core::SpikingLayer<Real>>& decoder() { return decoder_; }
  core::ReadoutLayer<Real>& readout() { return readout_; }

  template <typename Other>
  Model<Other> cast() const;

  // Tape-free inference over {M, bins} raw LPS, one frame per timestep from
  // a zero state. Fills `record` with every spiking layer's output if given.
  Tensor<Real> forward(const Tensor<Real>& noisy_lps, core::SpikeRecord* record = nullptr) const;

  dsp::LpsSpectrogram forward_utterance(const dsp::LpsSpectrogram& noisy,
                                        core::SpikeRecord* record = nullptr) const;

  // Records the same computation on `tape`; parameters are bound to
  // `grads` (from zero_gradients()). Returns the {M, bins} raw LPS estimate.
  engine::VarId forward_graph(engine::Tape<Real>& tape, const Tensor<Real>& noisy_lps,
                              std::vector<Tensor<Real>>& grads) const;

  // Empty record with layer shapes and synaptic projections filled in.
  core::SpikeRecord empty_spike_record() const;

 private:
  template <typename>
  friend class Model;

  ModelConfig config_;
  NormalizationStats norm_;
  std::vector<core::SpikingLayer<Real>> encoder_;
  std::vector<core::SpikingLayer<Real>> decoder_;
  core::ReadoutLayer<Real> readout_;
};

template <typename Real>
Tensor<Real> lps_to_tensor(const dsp::LpsSpectrogram& lps);
template <typename Real>
dsp::LpsSpectrogram tensor_to_lps(const Tensor<Real>& t);

}  // namespace snnse::model
