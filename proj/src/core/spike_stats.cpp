#include "snnse/core/spike_stats.hpp"

#include <algorithm>
#include <string>

#include "snnse/error.hpp"

namespace snnse::core {

std::uint64_t fan_out(std::size_t pos, std::size_t input_length,
                      const engine::ConvGeometry& geometry, std::size_t out_channels) {
  const std::size_t out_len = geometry.output_length(input_length);
  const long p = static_cast<long>(pos) + geometry.pad();
  std::uint64_t covered = 0;
  // Output o covers input pos iff 0 <= pos + pad - o * stride < kernel.
  for (long o = 0; o < static_cast<long>(out_len); ++o) {
    const long tap = p - o * geometry.stride;
    if (tap >= 0 && tap < geometry.kernel) ++covered;
  }
  return covered * out_channels;
}

SpikeStats spike_stats(const SpikeRecord& record) {
  SpikeStats stats;
  std::vector<std::vector<std::uint64_t>> counts;  // per layer: spikes per position (all t, c)
  for (const auto& layer : record.layers) {
    if (layer.neurons() == 0 || layer.values.size() % layer.neurons() != 0) {
      throw IntegrityError("layer " + layer.name + ": spike buffer does not match its shape");
    }
    LayerActivity act;
    act.name = layer.name;
    act.neurons = layer.neurons();
    act.timesteps = layer.timesteps();
    std::vector<std::uint64_t> per_pos(layer.length, 0);
    for (std::size_t j = 0; j < layer.values.size(); ++j) {
      const float v = layer.values[j];
      if (v == 1.0f) {
        ++act.spikes;
        ++per_pos[(j / layer.channels) % layer.length];
      } else if (v != 0.0f) {
        throw IntegrityError("layer " + layer.name + ": non-binary spike value " + std::to_string(v));
      }
    }
    const double cells = static_cast<double>(act.neurons) * static_cast<double>(act.timesteps);
    act.firing_rate = cells > 0 ? static_cast<double>(act.spikes) / cells : 0.0;
    stats.layers.push_back(act);
    counts.push_back(std::move(per_pos));
  }

  for (const auto& proj : record.projections) {
    if (proj.source >= record.layers.size()) throw IntegrityError("projection source out of range");
    const auto& per_pos = counts[proj.source];
    std::uint64_t synops = 0;
    for (std::size_t pos = 0; pos < per_pos.size(); ++pos) {
      if (per_pos[pos] == 0) continue;
      if (proj.routing == Routing::kDirect) {
        if (pos >= proj.target_input_length) throw IntegrityError("projection length mismatch");
        synops += per_pos[pos] * fan_out(pos, proj.target_input_length, proj.geometry,
                                         proj.target_out_channels);
      } else {
        for (std::size_t dst : {2 * pos, 2 * pos + 1}) {
          if (dst >= proj.target_input_length) continue;
          synops += per_pos[pos] * fan_out(dst, proj.target_input_length, proj.geometry,
                                           proj.target_out_channels);
        }
      }
    }
    auto it = std::find_if(stats.synops.begin(), stats.synops.end(),
                           [&](const TargetSynops& t) { return t.target == proj.target; });
    if (it == stats.synops.end()) {
      stats.synops.push_back({proj.target, synops});
    } else {
      it->synops += synops;
    }
    stats.total_synops += synops;
  }
  return stats;
}

}  // namespace snnse::core
