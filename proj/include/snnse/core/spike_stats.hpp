#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "snnse/engine/conv.hpp"

namespace snnse::core {

// Output spikes of one layer over time: values[t][pos][ch], time-major.
struct LayerSpikes {
  std::string name;
  std::size_t length = 0;
  std::size_t channels = 0;
  std::vector<float> values;

  std::size_t neurons() const { return length * channels; }
  std::size_t timesteps() const { return neurons() == 0 ? 0 : values.size() / neurons(); }
};

enum class Routing {
  kDirect,        // fed straight into the target conv
  kUpsampleCrop,  // nearest x2 upsample then trailing crop
};

// Delivery of a source layer's spikes into a target convolution.
struct Projection {
  std::size_t source = 0;  // index into SpikeRecord::layers
  std::string target;
  Routing routing = Routing::kDirect;
  std::size_t target_input_length = 0;
  engine::ConvGeometry geometry;
  std::size_t target_out_channels = 0;
};

struct SpikeRecord {
  std::vector<LayerSpikes> layers;
  std::vector<Projection> projections;
};

struct LayerActivity {
  std::string name;
  std::uint64_t spikes = 0;
  std::uint64_t neurons = 0;
  std::uint64_t timesteps = 0;
  double firing_rate = 0.0;
};

struct TargetSynops {
  std::string target;
  std::uint64_t synops = 0;
};

struct SpikeStats {
  std::vector<LayerActivity> layers;
  std::vector<TargetSynops> synops;  // one row per target conv, in order seen
  std::uint64_t total_synops = 0;
};

// Synapses reached by one spike at conv-input position `pos`:
// C_out times the number of output positions whose kernel covers pos.
std::uint64_t fan_out(std::size_t pos, std::size_t input_length,
                      const engine::ConvGeometry& geometry, std::size_t out_channels);

// Firing rate per layer and synaptic operations per target. Throws
// IntegrityError on a non-binary entry or inconsistent shapes.
SpikeStats spike_stats(const SpikeRecord& record);

}  // namespace snnse::core
