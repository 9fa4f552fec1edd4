#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "snnse/engine/adam.hpp"
#include "snnse/model/unet.hpp"

namespace snnse::model {

struct SeedRecord {
  std::uint64_t model = 0;
  std::uint64_t split = 0;
  std::uint64_t data = 0;

  bool operator==(const SeedRecord&) const = default;
};

// Optional training progress stored alongside the weights.
struct TrainingState {
  engine::AdamState<float> adam;
  std::uint64_t epoch = 0;
  double best_val_lsd = 0.0;
};

struct Checkpoint {
  Model<float> model;
  SeedRecord seeds;
  std::optional<TrainingState> training;
};

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path,
                     const SeedRecord& seeds = {}, const TrainingState* training = nullptr);

// Throws CheckpointError (checksum, version, truncation, missing tensors).
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace snnse::model
