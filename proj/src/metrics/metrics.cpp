#include "snnse/metrics/metrics.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "snnse/dsp/lps.hpp"
#include "snnse/dsp/wav_io.hpp"
#include "snnse/engine/loss.hpp"
#include "snnse/error.hpp"
#include "snnse/model/unet.hpp"
#include "snnse/util/kv.hpp"

namespace snnse::metrics {

double lsd_metric(const dsp::LpsSpectrogram& ref, const dsp::LpsSpectrogram& est) {
  return engine::lsd_value(model::lps_to_tensor<double>(est), model::lps_to_tensor<double>(ref),
                           0.0);
}

double si_snr(const dsp::Waveform& ref, const dsp::Waveform& est) {
  const auto& r = ref.samples;
  const auto& e = est.samples;
  if (r.size() != e.size()) {
    throw ShapeError("si_snr: lengths " + std::to_string(r.size()) + " vs " +
                     std::to_string(e.size()));
  }
  if (r.empty()) throw ShapeError("si_snr: empty signal");
  const double n = static_cast<double>(r.size());
  double mr = 0.0, me = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    mr += r[i];
    me += e[i];
  }
  mr /= n;
  me /= n;
  double dot = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    dot += (e[i] - me) * (r[i] - mr);
    rr += (r[i] - mr) * (r[i] - mr);
  }
  if (!(rr > 0.0)) throw DomainError("si_snr: zero reference");
  const double g = dot / rr;
  double ss = 0.0, ee = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double s = g * (r[i] - mr);
    const double err = (e[i] - me) - s;
    ss += s * s;
    ee += err * err;
  }
  if (ee <= 0.0) return kSiSnrCap;
  if (ss <= 0.0) return -kSiSnrCap;
  return std::min(kSiSnrCap, 10.0 * std::log10(ss / ee));
}

EvalMeans mean_of(const std::vector<EvalRow>& rows) {
  EvalMeans m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.lsd_noisy += r.lsd_noisy;
    m.lsd_enhanced += r.lsd_enhanced;
    m.si_snr_noisy += r.si_snr_noisy;
    m.si_snr_enhanced += r.si_snr_enhanced;
  }
  const double n = static_cast<double>(rows.size());
  m.lsd_noisy /= n;
  m.lsd_enhanced /= n;
  m.si_snr_noisy /= n;
  m.si_snr_enhanced /= n;
  return m;
}

EvalRow evaluate_pair(const std::string& id, const dsp::Waveform& clean, const dsp::Waveform& noisy,
                      const dsp::Waveform& enhanced, const dsp::StftConfig& cfg) {
  const auto clean_lps = dsp::waveform_lps(clean, cfg);
  EvalRow row;
  row.id = id;
  row.lsd_noisy = lsd_metric(clean_lps, dsp::waveform_lps(noisy, cfg));
  row.lsd_enhanced = lsd_metric(clean_lps, dsp::waveform_lps(enhanced, cfg));
  row.si_snr_noisy = si_snr(clean, noisy);
  row.si_snr_enhanced = si_snr(clean, enhanced);
  return row;
}

EvalReport evaluate_set(const data::DatasetManifest& manifest, const Enhancer& enhancer,
                        const EvalOptions& options) {
  if (manifest.pairs.empty()) throw DatasetError("empty test manifest");
  if (options.wav_dir) std::filesystem::create_directories(*options.wav_dir);

  const std::size_t n = manifest.pairs.size();
  std::vector<std::optional<EvalRow>> rows(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const auto& pair = manifest.pairs[i];
      try {
        const auto [noisy, clean] = data::load_pair_waveforms(pair);
        const auto enhanced = enhancer(noisy);
        if (options.wav_dir) dsp::write_wav(enhanced, *options.wav_dir / (pair.id + ".wav"));
        rows[i] = evaluate_pair(pair.id, clean, noisy, enhanced, options.stft);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  EvalReport report;
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i]) {
      report.rows.push_back(*rows[i]);
    } else {
      report.failures.push_back({manifest.pairs[i].id, errors[i]});
    }
  }
  report.mean = mean_of(report.rows);
  return report;
}

void write_report(const EvalReport& report, std::ostream& out) {
  using util::format_double;
  out << "id\tlsd_noisy\tlsd_enhanced\tsi_snr_noisy\tsi_snr_enhanced\n";
  for (const auto& r : report.rows) {
    out << r.id << '\t' << format_double(r.lsd_noisy) << '\t' << format_double(r.lsd_enhanced)
        << '\t' << format_double(r.si_snr_noisy) << '\t' << format_double(r.si_snr_enhanced)
        << '\n';
  }
  out << summary_text(report);
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  write_report(report, f);
  if (!f) throw IoError("write failed: " + path.string());
}

std::string summary_text(const EvalReport& report) {
  using util::format_double;
  std::ostringstream s;
  s << "# count\t" << report.rows.size() << '\n';
  s << "# failures\t" << report.failures.size() << '\n';
  s << "# mean_lsd_noisy\t" << format_double(report.mean.lsd_noisy) << '\n';
  s << "# mean_lsd_enhanced\t" << format_double(report.mean.lsd_enhanced) << '\n';
  s << "# mean_si_snr_noisy\t" << format_double(report.mean.si_snr_noisy) << '\n';
  s << "# mean_si_snr_enhanced\t" << format_double(report.mean.si_snr_enhanced) << '\n';
  for (const auto& f : report.failures) s << "# failed\t" << f.id << '\t' << f.message << '\n';
  for (const auto& [k, v] : report.config) s << "# config." << k << '\t' << v << '\n';
  return s.str();
}

}  // namespace snnse::metrics
