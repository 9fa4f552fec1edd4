#include "snnse/model/enhance.hpp"

#include "snnse/dsp/lps.hpp"
#include "snnse/dsp/resample.hpp"

namespace snnse::model {

std::size_t padded_length(std::size_t length, const dsp::StftConfig& cfg) {
  const auto frame = static_cast<std::size_t>(cfg.frame_len);
  const auto hop = static_cast<std::size_t>(cfg.hop_len);
  if (length <= frame) return frame;
  return frame + (length - frame + hop - 1) / hop * hop;
}

dsp::Waveform enhance(const Model<float>& model, const dsp::Waveform& input,
                      core::SpikeRecord* record, const dsp::StftConfig& cfg) {
  dsp::Waveform w = dsp::to_model_rate(input);
  const std::size_t length = w.samples.size();
  dsp::fit_length(w, padded_length(length, cfg));

  const auto spec = dsp::stft(w, cfg);
  const auto est = model.forward_utterance(dsp::lps_from_magnitude(dsp::magnitude(spec)), record);
  auto out = dsp::reconstruct(dsp::magnitude_from_lps(est), spec, cfg, w.sample_rate);
  dsp::fit_length(out, length);
  return out;
}

}  // namespace snnse::model
