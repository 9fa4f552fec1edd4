#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "snnse/data/dataset.hpp"
#include "snnse/dsp/stft.hpp"
#include "snnse/dsp/waveform.hpp"

namespace snnse::metrics {

inline constexpr double kSiSnrCap = 60.0;

// Mean per-frame RMS log-spectral difference, no epsilon.
double lsd_metric(const dsp::LpsSpectrogram& ref, const dsp::LpsSpectrogram& est);

// Scale-invariant SNR in dB after zero-meaning both signals, capped at 60.
double si_snr(const dsp::Waveform& ref, const dsp::Waveform& est);

struct EvalRow {
  std::string id;
  double lsd_noisy = 0.0;
  double lsd_enhanced = 0.0;
  double si_snr_noisy = 0.0;
  double si_snr_enhanced = 0.0;
};

struct EvalFailure {
  std::string id;
  std::string message;
};

struct EvalMeans {
  double lsd_noisy = 0.0;
  double lsd_enhanced = 0.0;
  double si_snr_noisy = 0.0;
  double si_snr_enhanced = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // manifest order
  std::vector<EvalFailure> failures;
  EvalMeans mean;
  std::map<std::string, std::string> config;

  std::size_t count() const { return rows.size(); }
};

EvalMeans mean_of(const std::vector<EvalRow>& rows);

// Maps a 16 kHz noisy waveform to an enhanced waveform of the same length.
using Enhancer = std::function<dsp::Waveform(const dsp::Waveform&)>;

// Metrics for one utterance from 16 kHz waveforms of equal length.
EvalRow evaluate_pair(const std::string& id, const dsp::Waveform& clean, const dsp::Waveform& noisy,
                      const dsp::Waveform& enhanced, const dsp::StftConfig& cfg = {});

struct EvalOptions {
  std::optional<std::filesystem::path> wav_dir;  // enhanced WAVs written here
  unsigned threads = 1;
  dsp::StftConfig stft;
};

// Per-utterance failures are recorded and skipped; means cover the rest.
EvalReport evaluate_set(const data::DatasetManifest& manifest, const Enhancer& enhancer,
                        const EvalOptions& options = {});

// Tab-separated rows with a header line, then '#'-prefixed summary lines.
void write_report(const EvalReport& report, std::ostream& out);
void write_report(const EvalReport& report, const std::filesystem::path& path);
std::string summary_text(const EvalReport& report);

}  // namespace snnse::metrics
