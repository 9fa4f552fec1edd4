#include "snnse/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include "snnse/dsp/lps.hpp"
#include "snnse/dsp/resample.hpp"
#include "snnse/dsp/wav_io.hpp"
#include "snnse/error.hpp"
#include "snnse/model/container.hpp"

namespace snnse::data {
namespace {

std::map<std::string, fs::path> wav_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".wav") out[entry.path().stem().string()] = entry.path();
  }
  return out;
}

std::uint32_t file_crc(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw IoError("cannot open " + p.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                         std::istreambuf_iterator<char>());
  return model::crc32_of(bytes.data(), bytes.size());
}

}  // namespace

double DatasetManifest::total_seconds() const {
  double s = 0.0;
  for (const auto& p : pairs) s += p.duration;
  return s;
}

ScanResult scan_dataset(const fs::path& clean_dir, const fs::path& noisy_dir) {
  const auto clean = wav_files(clean_dir);
  const auto noisy = wav_files(noisy_dir);
  ScanResult result;
  for (const auto& [stem, path] : noisy) {
    const auto it = clean.find(stem);
    if (it == clean.end()) {
      result.unmatched.push_back(path.filename().string());
      continue;
    }
    const auto w = dsp::read_wav(path);
    result.manifest.pairs.push_back({stem, it->second, path, w.duration_seconds()});
  }
  for (const auto& [stem, path] : clean) {
    if (!noisy.count(stem)) result.unmatched.push_back(path.filename().string());
  }
  if (result.manifest.pairs.empty()) {
    throw DatasetError("no matching clean/noisy pairs in " + clean_dir.string() + " and " +
                       noisy_dir.string());
  }
  return result;
}

Split split_train_val(const DatasetManifest& manifest, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw ConfigError("val_fraction must lie in (0, 1)");
  }
  const std::size_t n = manifest.size();
  if (n < 2) throw DatasetError("need at least 2 utterances to split, have " + std::to_string(n));
  auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::size_t> val_idx(order.begin(), order.begin() + static_cast<long>(n_val));
  Split s;
  for (std::size_t i = 0; i < n; ++i) {
    (val_idx.count(i) ? s.val : s.train).pairs.push_back(manifest.pairs[i]);
  }
  return s;
}

std::pair<dsp::Waveform, dsp::Waveform> load_pair_waveforms(const UtterancePair& pair) {
  auto noisy = dsp::to_model_rate(dsp::read_wav(pair.noisy));
  auto clean = dsp::to_model_rate(dsp::read_wav(pair.clean));
  const std::size_t len = std::min(noisy.samples.size(), clean.samples.size());
  noisy.samples.resize(len);
  clean.samples.resize(len);
  return {std::move(noisy), std::move(clean)};
}

UtteranceFeatures features_from_waveforms(const dsp::Waveform& noisy, const dsp::Waveform& clean,
                                          const dsp::StftConfig& cfg) {
  return {model::lps_to_tensor<float>(dsp::waveform_lps(noisy, cfg)),
          model::lps_to_tensor<float>(dsp::waveform_lps(clean, cfg))};
}

FeatureStore::FeatureStore(dsp::StftConfig cfg, std::optional<fs::path> cache_dir,
                           bool keep_in_memory)
    : cfg_(cfg), cache_dir_(std::move(cache_dir)), keep_in_memory_(keep_in_memory) {
  cfg_.validate();
  if (cache_dir_) fs::create_directories(*cache_dir_);
}

std::optional<fs::path> FeatureStore::cache_dir_from_env() {
  if (const char* dir = std::getenv("SNNSE_CACHE_DIR"); dir && *dir) return fs::path(dir);
  return std::nullopt;
}

UtteranceFeatures FeatureStore::compute(const UtterancePair& pair) const {
  fs::path cache_file;
  if (cache_dir_) {
    std::ostringstream key;
    key << pair.id << '-' << std::hex << std::setw(8) << std::setfill('0') << file_crc(pair.clean)
        << std::setw(8) << file_crc(pair.noisy) << std::dec << '-' << cfg_.frame_len << '-'
        << cfg_.hop_len << ".lps";
    cache_file = *cache_dir_ / key.str();
    if (fs::exists(cache_file)) {
      try {
        const auto c = model::read_container(cache_file);
        return {c.get_f32("noisy"), c.get_f32("clean")};
      } catch (const CheckpointError&) {
        // Corrupt cache entries are recomputed and overwritten.
      }
    }
  }
  const auto [noisy, clean] = load_pair_waveforms(pair);
  auto features = features_from_waveforms(noisy, clean, cfg_);
  if (cache_dir_) {
    model::Container c;
    c.metadata["kind"] = "lps-cache";
    c.put("noisy", features.noisy);
    c.put("clean", features.clean);
    model::write_container(c, cache_file);
  }
  return features;
}

const UtteranceFeatures& FeatureStore::load(const UtterancePair& pair) {
  if (!keep_in_memory_) {
    scratch_ = compute(pair);
    return scratch_;
  }
  auto it = memo_.find(pair.id);
  if (it == memo_.end()) it = memo_.emplace(pair.id, compute(pair)).first;
  return it->second;
}

std::vector<std::vector<SegmentRef>> plan_batches(const std::vector<std::size_t>& frame_counts,
                                                  std::uint64_t epoch_seed, std::size_t batch_size,
                                                  std::size_t segment_frames) {
  if (batch_size == 0 || segment_frames == 0) throw ConfigError("batch and segment must be positive");
  std::mt19937_64 rng(epoch_seed);
  std::vector<std::size_t> order(frame_counts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<SegmentRef>> plan;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i % batch_size == 0) plan.emplace_back();
    const std::size_t frames = frame_counts[order[i]];
    std::size_t start = 0;
    if (frames > segment_frames) {
      std::uniform_int_distribution<std::size_t> dist(0, frames - segment_frames);
      start = dist(rng);
    }
    plan.back().push_back({order[i], start});
  }
  return plan;
}

engine::Tensor<float> cut_segment(const engine::Tensor<float>& lps, std::size_t start,
                                  std::size_t segment_frames) {
  const std::size_t bins = lps.dim(1);
  engine::Tensor<float> out({segment_frames, bins}, static_cast<float>(dsp::kLpsFloor));
  const std::size_t avail = start < lps.dim(0) ? std::min(segment_frames, lps.dim(0) - start) : 0;
  std::copy_n(lps.data() + start * bins, avail * bins, out.data());
  return out;
}

BatchStream::BatchStream(const DatasetManifest& manifest, FeatureStore& store,
                         std::uint64_t epoch_seed, std::size_t batch_size,
                         std::size_t segment_frames)
    : manifest_(manifest), store_(store), segment_frames_(segment_frames) {
  std::vector<std::size_t> counts;
  for (const auto& p : manifest.pairs) counts.push_back(store.load(p).frames());
  plan_ = plan_batches(counts, epoch_seed, batch_size, segment_frames);
}

Batch BatchStream::next() {
  Batch b;
  for (const auto& ref : plan_.at(next_)) {
    const auto& pair = manifest_.pairs[ref.utterance];
    const auto& f = store_.load(pair);
    b.items.push_back({pair.id, ref.start, cut_segment(f.noisy, ref.start, segment_frames_),
                       cut_segment(f.clean, ref.start, segment_frames_)});
  }
  ++next_;
  return b;
}

model::NormalizationStats norm_stats_of(const std::vector<const engine::Tensor<float>*>& lps) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto* t : lps) {
    for (float v : t->values()) sum += v;
    count += t->size();
  }
  if (count == 0) throw DatasetError("no LPS cells for normalization statistics");
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  for (const auto* t : lps) {
    for (float v : t->values()) sq += (v - mean) * (v - mean);
  }
  const double std = std::sqrt(sq / static_cast<double>(count));
  if (!(std > 1e-6)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "degenerate LPS statistics: mean=" << mean << " std=" << std << " (<= 1e-6)";
    throw DatasetError(msg.str());
  }
  return {mean, std};
}

model::NormalizationStats compute_norm_stats(const DatasetManifest& train, FeatureStore& store,
                                             std::size_t cap) {
  if (train.pairs.empty()) throw DatasetError("no utterances for normalization statistics");
  std::vector<const UtterancePair*> sorted;
  for (const auto& p : train.pairs) sorted.push_back(&p);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  if (cap > 0 && sorted.size() > cap) sorted.resize(cap);
  // Hold copies; the store may evict when not memoizing.
  std::vector<engine::Tensor<float>> grids;
  for (const auto* p : sorted) grids.push_back(store.load(*p).noisy);
  std::vector<const engine::Tensor<float>*> ptrs;
  for (const auto& g : grids) ptrs.push_back(&g);
  return norm_stats_of(ptrs);
}

}  // namespace snnse::data
