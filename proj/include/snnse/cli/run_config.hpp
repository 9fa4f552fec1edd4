#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "snnse/model/checkpoint.hpp"
#include "snnse/model/config.hpp"

namespace snnse::cli {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kDefaultSeed = 20240531;

// Settings shared by all subcommands. Keys accepted by apply() match the
// long flag names: clean-dir, noisy-dir, checkpoint, out, input, epochs,
// batch, lr, seed, segment-frames, detach-reset, val-fraction, norm-cap,
// threads, steps, overfit, bypass-model, and model.<key> for the network.
struct RunConfig {
  fs::path clean_dir;
  fs::path noisy_dir;
  fs::path checkpoint;
  fs::path out;
  fs::path input;

  model::ModelConfig model = model::ModelConfig::standard();
  std::uint64_t seed = kDefaultSeed;
  int epochs = 60;
  int batch = 32;
  double lr = 0.002;
  int segment_frames = 126;
  double val_fraction = 0.05;
  std::size_t norm_cap = 500;  // utterances used for input statistics
  unsigned threads = 1;
  bool overfit = false;  // single utterance, fixed crop, `steps` updates
  int steps = 500;
  bool bypass_model = false;  // evaluate: enhanced = noisy

  // Later calls override earlier ones. Throws ConfigError on unknown keys
  // or malformed values.
  void apply(const std::map<std::string, std::string>& values);
  void validate() const;

  model::SeedRecord seeds() const;
  std::map<std::string, std::string> echo() const;
};

RunConfig load_run_config(const fs::path& file);

}  // namespace snnse::cli
