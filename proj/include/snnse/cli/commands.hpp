#pragma once

#include <ostream>
#include <vector>

#include "snnse/cli/run_config.hpp"
#include "snnse/core/spike_stats.hpp"
#include "snnse/dsp/waveform.hpp"
#include "snnse/metrics/metrics.hpp"

namespace snnse::cli {

inline constexpr const char* kLastCheckpoint = "checkpoint_last.snn";
inline constexpr const char* kBestCheckpoint = "checkpoint_best.snn";
inline constexpr const char* kTrainLog = "train_log.tsv";

struct TrainResult {
  std::size_t epochs_run = 0;
  std::size_t steps_run = 0;
  double initial_train_lsd = 0.0;  // loss of the first step, before any update
  double final_train_lsd = 0.0;    // overfit: re-measured after the last update
  double best_val_lsd = 0.0;
  std::vector<double> step_losses;
};

// Writes checkpoint_last/checkpoint_best and appends to train_log.tsv in
// cfg.out. Overfit mode trains on a fixed crop of the first utterance (by
// id) and writes only checkpoint_last. A non-empty cfg.checkpoint resumes
// from its weights, optimizer state and epoch; seeds must match.
TrainResult cmd_train(const RunConfig& cfg, std::ostream& msg);

// Enhances cfg.input into cfg.out (16 kHz PCM).
dsp::Waveform cmd_enhance(const RunConfig& cfg, std::ostream& msg);

// Pairs from cfg.clean_dir/cfg.noisy_dir; enhanced WAVs go to
// cfg.out/enhanced and the report to cfg.out/report.tsv.
metrics::EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& msg);

// Per-layer firing rates and synaptic operations for cfg.input.
core::SpikeStats cmd_spike_stats(const RunConfig& cfg, std::ostream& msg);

void print_spike_stats(const core::SpikeStats& stats, std::ostream& out);

}  // namespace snnse::cli
