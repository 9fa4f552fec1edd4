#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snnse/dsp/stft.hpp"
#include "snnse/engine/tensor.hpp"
#include "snnse/model/unet.hpp"

namespace snnse::data {

namespace fs = std::filesystem;

struct UtterancePair {
  std::string id;  // shared filename stem
  fs::path clean;
  fs::path noisy;
  double duration = 0.0;  // seconds, from the noisy file
};

struct DatasetManifest {
  std::vector<UtterancePair> pairs;  // sorted by id

  std::size_t size() const { return pairs.size(); }
  double total_seconds() const;
};

struct ScanResult {
  DatasetManifest manifest;
  std::vector<std::string> unmatched;  // filenames present in only one directory
};

// Pairs *.wav files by stem across the two directories. Throws DatasetError
// if a directory is missing or no stem is shared.
ScanResult scan_dataset(const fs::path& clean_dir, const fs::path& noisy_dir);

struct Split {
  DatasetManifest train;
  DatasetManifest val;
};

// Random utterance-level split; val gets round(n * fraction) pairs, at least
// one and at most n - 1. Deterministic for a fixed seed.
Split split_train_val(const DatasetManifest& manifest, double val_fraction, std::uint64_t seed);

// Noisy/clean LPS of one pair at 16 kHz, {frames, bins} each, cut from
// identical sample ranges.
struct UtteranceFeatures {
  engine::Tensor<float> noisy;
  engine::Tensor<float> clean;

  std::size_t frames() const { return noisy.dim(0); }
};

// Reads, resamples and analyses pairs. Results are memoized in memory and,
// when a cache directory is set, on disk in the container format keyed by
// the CRC-32 of both files and the STFT configuration.
class FeatureStore {
 public:
  explicit FeatureStore(dsp::StftConfig cfg = {}, std::optional<fs::path> cache_dir = std::nullopt,
                        bool keep_in_memory = true);

  // Cache directory from SNNSE_CACHE_DIR, if set.
  static std::optional<fs::path> cache_dir_from_env();

  const UtteranceFeatures& load(const UtterancePair& pair);
  const dsp::StftConfig& stft_config() const { return cfg_; }

 private:
  UtteranceFeatures compute(const UtterancePair& pair) const;

  dsp::StftConfig cfg_;
  std::optional<fs::path> cache_dir_;
  bool keep_in_memory_;
  std::map<std::string, UtteranceFeatures> memo_;
  UtteranceFeatures scratch_;
};

// Loads both 16 kHz waveforms of a pair, truncated to a common length.
std::pair<dsp::Waveform, dsp::Waveform> load_pair_waveforms(const UtterancePair& pair);

UtteranceFeatures features_from_waveforms(const dsp::Waveform& noisy, const dsp::Waveform& clean,
                                          const dsp::StftConfig& cfg);

struct SegmentRef {
  std::size_t utterance = 0;  // index into the manifest
  std::size_t start = 0;      // first frame
};

struct BatchItem {
  std::string id;
  std::size_t start = 0;
  engine::Tensor<float> noisy;  // {T, bins}
  engine::Tensor<float> clean;  // {T, bins}
};

struct Batch {
  std::vector<BatchItem> items;
};

// Per-epoch plan: utterance order shuffled by `epoch_seed`, one uniformly
// random T-frame crop per utterance (start 0 when shorter than T), grouped
// into batches of B (the last one may be smaller).
std::vector<std::vector<SegmentRef>> plan_batches(const std::vector<std::size_t>& frame_counts,
                                                  std::uint64_t epoch_seed, std::size_t batch_size,
                                                  std::size_t segment_frames);

// Frames [start, start+T) of `lps`; rows past the end hold ln(1e-10).
engine::Tensor<float> cut_segment(const engine::Tensor<float>& lps, std::size_t start,
                                  std::size_t segment_frames);

// Materialized batch stream over a manifest for one epoch.
class BatchStream {
 public:
  BatchStream(const DatasetManifest& manifest, FeatureStore& store, std::uint64_t epoch_seed,
              std::size_t batch_size, std::size_t segment_frames);

  bool has_next() const { return next_ < plan_.size(); }
  Batch next();
  std::size_t batch_count() const { return plan_.size(); }

 private:
  const DatasetManifest& manifest_;
  FeatureStore& store_;
  std::size_t segment_frames_;
  std::vector<std::vector<SegmentRef>> plan_;
  std::size_t next_ = 0;
};

// Population mean/std over every noisy-LPS cell of the first `cap`
// utterances in id order. Throws DatasetError if std <= 1e-6.
model::NormalizationStats compute_norm_stats(const DatasetManifest& train, FeatureStore& store,
                                             std::size_t cap);

// Same statistic over explicit LPS grids.
model::NormalizationStats norm_stats_of(const std::vector<const engine::Tensor<float>*>& lps);

}  // namespace snnse::data
