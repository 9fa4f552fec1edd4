#include "snnse/model/config.hpp"

#include <algorithm>
#include <sstream>

#include "snnse/engine/conv.hpp"
#include "snnse/error.hpp"
#include "snnse/util/kv.hpp"

namespace snnse::model {
namespace {

engine::ConvGeometry geometry(const LayerSpec& s) { return {s.kernel, s.stride}; }

std::string join(const std::vector<LayerSpec>& layers, int LayerSpec::*field) {
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(layers[i].*field);
  }
  return out;
}

std::vector<int> ints(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (value.empty()) return out;
  for (const auto& part : util::split(value, ',')) out.push_back(util::parse_int(key, part));
  return out;
}

}  // namespace

ModelConfig ModelConfig::standard() {
  ModelConfig cfg;
  const int enc_channels[] = {32, 32, 64, 64, 128, 128, 256, 256};
  for (int i = 0; i < 8; ++i) cfg.encoder.push_back({enc_channels[i], 5, i == 0 ? 1 : 2});
  const int dec_channels[] = {256, 128, 128, 64, 64, 32, 32};
  for (int c : dec_channels) cfg.decoder.push_back({c, 5, 1});
  return cfg;
}

std::vector<std::size_t> ModelConfig::encoder_lengths() const {
  std::vector<std::size_t> out;
  std::size_t len = static_cast<std::size_t>(bins);
  for (const auto& layer : encoder) {
    len = geometry(layer).output_length(len);
    out.push_back(len);
  }
  return out;
}

std::vector<std::size_t> ModelConfig::decoder_lengths() const {
  const auto enc = encoder_lengths();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < decoder.size(); ++i) out.push_back(enc[skip_source(i)]);
  return out;
}

std::size_t ModelConfig::decoder_in_channels(std::size_t i) const {
  const std::size_t from_below = i == 0 ? encoder.back().channels : decoder[i - 1].channels;
  return from_below + static_cast<std::size_t>(encoder[skip_source(i)].channels);
}

void ModelConfig::validate() const {
  if (bins < 2) throw ConfigError("bins=" + std::to_string(bins));
  if (encoder.size() < 2) throw ConfigError("at least two encoder layers required");
  if (decoder.size() + 1 != encoder.size()) {
    throw ConfigError("decoder layers (" + std::to_string(decoder.size()) +
                      ") must number one fewer than encoder layers (" +
                      std::to_string(encoder.size()) + ")");
  }
  if (encoder.front().stride != 1) {
    throw ConfigError("first encoder layer must have stride 1 so the readout sees every bin");
  }
  for (const auto& layers : {encoder, decoder}) {
    for (const auto& l : layers) {
      if (l.channels <= 0) throw ConfigError("channels must be positive");
      try {
        geometry(l).validate();
      } catch (const ShapeError& e) {
        throw ConfigError(e.what());
      }
    }
  }
  for (const auto& l : decoder) {
    if (l.stride != 1) throw ConfigError("decoder layers use stride 1");
  }
  try {
    engine::ConvGeometry{readout_kernel, 1}.validate();
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("readout: ") + e.what());
  }
  if (!(surrogate_width > 0.0)) throw ConfigError("surrogate width must be positive");

  const auto lengths = encoder_lengths();
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    if (lengths[i] >= lengths[i - 1] && encoder[i].stride == 2) {
      throw ConfigError("encoder ladder not decreasing at layer " + std::to_string(i + 1));
    }
  }
  if (lengths.back() < 2) {
    throw ConfigError("encoder ladder reaches length " + std::to_string(lengths.back()) + " (< 2)");
  }
  // Every decoder input, upsampled x2, must cover its skip length exactly or
  // with one trailing position to crop.
  std::size_t below = lengths.back();
  for (std::size_t i = 0; i < decoder.size(); ++i) {
    const std::size_t skip = lengths[skip_source(i)];
    if (skip != 2 * below && skip + 1 != 2 * below) {
      throw ConfigError("decoder " + std::to_string(i + 1) + ": skip length " +
                        std::to_string(skip) + " incompatible with upsampled length " +
                        std::to_string(2 * below));
    }
    below = skip;
  }
}

core::SpikeOptions ModelConfig::spike_options() const {
  core::SpikeOptions opts;
  opts.mode = relaxed_spikes ? core::SpikeMode::kRelaxed : core::SpikeMode::kHeaviside;
  opts.surrogate.width = surrogate_width;
  opts.detach_reset = detach_reset;
  return opts;
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os << "bins=" << bins << '\n'
     << "encoder.channels=" << join(encoder, &LayerSpec::channels) << '\n'
     << "encoder.kernels=" << join(encoder, &LayerSpec::kernel) << '\n'
     << "encoder.strides=" << join(encoder, &LayerSpec::stride) << '\n'
     << "decoder.channels=" << join(decoder, &LayerSpec::channels) << '\n'
     << "decoder.kernels=" << join(decoder, &LayerSpec::kernel) << '\n'
     << "readout.kernel=" << readout_kernel << '\n'
     << "surrogate.width=" << util::format_double(surrogate_width) << '\n'
     << "detach_reset=" << (detach_reset ? "true" : "false") << '\n'
     << "relaxed_spikes=" << (relaxed_spikes ? "true" : "false") << '\n';
  return os.str();
}

ModelConfig ModelConfig::from_text(std::string_view text) {
  const auto kv = util::parse_key_values(text);
  ModelConfig cfg = standard();
  auto get = [&](const char* key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  for (const auto& [key, value] : kv) {
    static const char* known[] = {"bins", "encoder.channels", "encoder.kernels", "encoder.strides",
                                  "decoder.channels", "decoder.kernels", "readout.kernel",
                                  "surrogate.width", "detach_reset", "relaxed_spikes"};
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown model config key '" + key + "'");
    }
  }
  if (auto* v = get("bins")) cfg.bins = util::parse_int("bins", *v);
  auto apply = [&](std::vector<LayerSpec>& layers, const char* key, int LayerSpec::*field) {
    const auto* v = get(key);
    if (!v) return;
    const auto values = ints(key, *v);
    if (values.size() != layers.size()) layers.resize(values.size(), LayerSpec{32, 5, 1});
    for (std::size_t i = 0; i < values.size(); ++i) layers[i].*field = values[i];
  };
  apply(cfg.encoder, "encoder.channels", &LayerSpec::channels);
  apply(cfg.encoder, "encoder.kernels", &LayerSpec::kernel);
  apply(cfg.encoder, "encoder.strides", &LayerSpec::stride);
  apply(cfg.decoder, "decoder.channels", &LayerSpec::channels);
  apply(cfg.decoder, "decoder.kernels", &LayerSpec::kernel);
  if (auto* v = get("readout.kernel")) cfg.readout_kernel = util::parse_int("readout.kernel", *v);
  if (auto* v = get("surrogate.width")) cfg.surrogate_width = util::parse_double("surrogate.width", *v);
  if (auto* v = get("detach_reset")) cfg.detach_reset = util::parse_bool("detach_reset", *v);
  if (auto* v = get("relaxed_spikes")) cfg.relaxed_spikes = util::parse_bool("relaxed_spikes", *v);
  cfg.validate();
  return cfg;
}

std::size_t parameter_count(const ModelConfig& cfg) {
  // conv: k * C_in * C_out + C_out; LIF: 3 per channel; readout beta: 1.
  std::size_t total = 0;
  std::size_t in = 1;
  for (const auto& l : cfg.encoder) {
    const std::size_t out = static_cast<std::size_t>(l.channels);
    total += static_cast<std::size_t>(l.kernel) * in * out + out + 3 * out;
    in = out;
  }
  for (std::size_t i = 0; i < cfg.decoder.size(); ++i) {
    const std::size_t out = static_cast<std::size_t>(cfg.decoder[i].channels);
    total += static_cast<std::size_t>(cfg.decoder[i].kernel) * cfg.decoder_in_channels(i) * out +
             4 * out;
  }
  const std::size_t last = static_cast<std::size_t>(cfg.decoder.back().channels);
  total += static_cast<std::size_t>(cfg.readout_kernel) * last + 1 + 1;
  return total;
}

}  // namespace snnse::model
