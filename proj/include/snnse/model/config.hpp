#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "snnse/core/lif.hpp"

namespace snnse::model {

struct LayerSpec {
  int channels = 32;
  int kernel = 5;
  int stride = 1;  // decoder layers always use stride 1

  bool operator==(const LayerSpec&) const = default;
};

// Frequency-axis U-Net: N strided spiking encoder layers, N-1 upsampling
// spiking decoder layers with concatenated skips, one non-spiking readout.
struct ModelConfig {
  int bins = 257;
  std::vector<LayerSpec> encoder;
  std::vector<LayerSpec> decoder;
  int readout_kernel = 5;
  double surrogate_width = 1.0;
  bool detach_reset = true;
  bool relaxed_spikes = false;  // smooth spike twin, for gradient checking only

  // 8 encoder layers (32,32,64,64,128,128,256,256; strides 1,2,...,2),
  // 7 decoder layers mirroring them, kernel 5 throughout, 257 bins.
  static ModelConfig standard();

  // Throws ConfigError on an invalid ladder.
  void validate() const;

  // Output length of every encoder layer (257, 129, ..., 3 by default).
  std::vector<std::size_t> encoder_lengths() const;
  // Output length of every decoder layer (5, 9, ..., 257 by default).
  std::vector<std::size_t> decoder_lengths() const;
  // Input channels of decoder layer i (upsampled + skip).
  std::size_t decoder_in_channels(std::size_t i) const;
  // Index of the encoder layer whose output is decoder i's skip input.
  std::size_t skip_source(std::size_t i) const { return encoder.size() - 2 - i; }

  core::SpikeOptions spike_options() const;

  // key=value lines; doubles printed round-trippably.
  std::string to_text() const;
  static ModelConfig from_text(std::string_view text);

  bool operator==(const ModelConfig&) const = default;
};

// Closed-form count of trainable scalars.
std::size_t parameter_count(const ModelConfig& cfg);

}  // namespace snnse::model
