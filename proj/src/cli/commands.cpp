#include "snnse/cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <limits>
#include <optional>

#include "snnse/cli/trainer.hpp"
#include "snnse/data/dataset.hpp"
#include "snnse/dsp/wav_io.hpp"
#include "snnse/engine/loss.hpp"
#include "snnse/error.hpp"
#include "snnse/model/checkpoint.hpp"
#include "snnse/model/enhance.hpp"
#include "snnse/util/kv.hpp"

namespace snnse::cli {
namespace {

using Clock = std::chrono::steady_clock;

class TrainLog {
 public:
  TrainLog(const fs::path& path, const char* header) : file_(path, std::ios::app) {
    if (!file_) throw IoError("cannot open " + path.string());
    if (fs::file_size(path) == 0) file_ << header << '\n';
  }

  void row(std::uint64_t index, double train, const std::string& val, double seconds) {
    file_ << index << '\t' << util::format_double(train) << '\t' << val << '\t'
          << util::format_double(seconds) << std::endl;
  }

 private:
  std::ofstream file_;
};

void require_dir(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string(what) + " is required");
}

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TrainResult train_overfit(const RunConfig& cfg, const data::DatasetManifest& manifest,
                          std::ostream& msg) {
  const auto seeds = cfg.seeds();
  data::FeatureStore store(dsp::StftConfig{}, data::FeatureStore::cache_dir_from_env());
  const auto& pair = manifest.pairs.front();
  const auto& f = store.load(pair);
  const auto T = static_cast<std::size_t>(cfg.segment_frames);
  const auto noisy = data::cut_segment(f.noisy, 0, T);
  const auto clean = data::cut_segment(f.clean, 0, T);

  auto net = model::Model<float>::build(cfg.model, seeds.model);
  net.set_normalization(data::norm_stats_of({&noisy}));
  Trainer trainer(net, engine::AdamConfig{cfg.lr}, cfg.threads);
  TrainLog log(cfg.out / kTrainLog, "step\ttrain_lsd\tval_lsd\twall_time");
  msg << "overfit: utterance " << pair.id << ", " << T << " frames, " << cfg.steps << " steps\n";

  TrainResult result;
  const auto start = Clock::now();
  for (int s = 1; s <= cfg.steps; ++s) {
    const double loss = trainer.step({{&noisy, &clean}});
    result.step_losses.push_back(loss);
    log.row(static_cast<std::uint64_t>(s), loss, "nan", elapsed(start));
  }
  result.steps_run = static_cast<std::size_t>(cfg.steps);
  result.initial_train_lsd = result.step_losses.front();
  result.final_train_lsd = engine::lsd_value(net.forward(noisy), clean);
  result.best_val_lsd = std::numeric_limits<double>::quiet_NaN();
  model::TrainingState state{trainer.optimizer().state(), 0, result.final_train_lsd};
  model::save_checkpoint(net, cfg.out / kLastCheckpoint, seeds, &state);
  msg << "overfit: train LSD " << util::format_double(result.initial_train_lsd) << " -> "
      << util::format_double(result.final_train_lsd) << '\n';
  return result;
}

}  // namespace

TrainResult cmd_train(const RunConfig& cfg, std::ostream& msg) {
  cfg.validate();
  require_dir(cfg.clean_dir, "clean-dir");
  require_dir(cfg.noisy_dir, "noisy-dir");
  require_dir(cfg.out, "out");
  fs::create_directories(cfg.out);

  const auto scan = data::scan_dataset(cfg.clean_dir, cfg.noisy_dir);
  for (const auto& name : scan.unmatched) msg << "warning: unmatched file " << name << '\n';
  if (cfg.overfit) return train_overfit(cfg, scan.manifest, msg);

  const auto seeds = cfg.seeds();
  const auto split = data::split_train_val(scan.manifest, cfg.val_fraction, seeds.split);
  msg << "train: " << split.train.size() << " utterances (" << split.train.total_seconds()
      << " s), val: " << split.val.size() << '\n';

  data::FeatureStore store(dsp::StftConfig{}, data::FeatureStore::cache_dir_from_env());
  std::optional<model::Checkpoint> resume;
  if (!cfg.checkpoint.empty()) {
    resume = model::load_checkpoint(cfg.checkpoint);
    if (!resume->training) throw ConfigError(cfg.checkpoint.string() + " has no training state");
    if (!(resume->seeds == seeds)) throw ConfigError("resume seeds differ from --seed");
  }
  auto net = resume ? resume->model : model::Model<float>::build(cfg.model, seeds.model);
  if (!resume) net.set_normalization(data::compute_norm_stats(split.train, store, cfg.norm_cap));
  Trainer trainer(net, engine::AdamConfig{cfg.lr}, cfg.threads);
  TrainLog log(cfg.out / kTrainLog, "epoch\ttrain_lsd\tval_lsd\twall_time");

  TrainResult result;
  result.best_val_lsd = std::numeric_limits<double>::infinity();
  int first_epoch = 1;
  if (resume) {
    trainer.optimizer().state() = resume->training->adam;
    result.best_val_lsd = resume->training->best_val_lsd;
    first_epoch = static_cast<int>(resume->training->epoch) + 1;
    msg << "resuming after epoch " << resume->training->epoch << '\n';
  }
  const auto start = Clock::now();
  for (int epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
    data::BatchStream stream(split.train, store, util::mix_seed(seeds.data, epoch),
                             static_cast<std::size_t>(cfg.batch),
                             static_cast<std::size_t>(cfg.segment_frames));
    double weighted = 0.0;
    std::size_t items = 0;
    while (stream.has_next()) {
      const auto batch = stream.next();
      std::vector<TrainingPair> pairs;
      for (const auto& item : batch.items) pairs.push_back({&item.noisy, &item.clean});
      const double loss = trainer.step(pairs);
      if (result.step_losses.empty()) result.initial_train_lsd = loss;
      result.step_losses.push_back(loss);
      weighted += loss * static_cast<double>(pairs.size());
      items += pairs.size();
    }
    const double train_lsd = weighted / static_cast<double>(items);
    const double val_lsd = validation_lsd(net, split.val, store);
    log.row(static_cast<std::uint64_t>(epoch), train_lsd, util::format_double(val_lsd),
            elapsed(start));
    msg << "epoch " << epoch << ": train LSD " << util::format_double(train_lsd) << ", val LSD "
        << util::format_double(val_lsd) << '\n';

    const bool best = val_lsd < result.best_val_lsd;
    if (best) result.best_val_lsd = val_lsd;
    model::TrainingState state{trainer.optimizer().state(), static_cast<std::uint64_t>(epoch),
                               result.best_val_lsd};
    model::save_checkpoint(net, cfg.out / kLastCheckpoint, seeds, &state);
    if (best) model::save_checkpoint(net, cfg.out / kBestCheckpoint, seeds, &state);
    result.epochs_run = static_cast<std::size_t>(epoch);
    result.final_train_lsd = train_lsd;
  }
  result.steps_run = result.step_losses.size();
  return result;
}

dsp::Waveform cmd_enhance(const RunConfig& cfg, std::ostream& msg) {
  require_dir(cfg.checkpoint, "checkpoint");
  require_dir(cfg.input, "input");
  require_dir(cfg.out, "out");
  const auto ckpt = model::load_checkpoint(cfg.checkpoint);
  const auto input = dsp::read_wav(cfg.input);
  auto out = model::enhance(ckpt.model, input);
  if (cfg.out.has_parent_path()) fs::create_directories(cfg.out.parent_path());
  dsp::write_wav(out, cfg.out);
  msg << "enhanced " << cfg.input.string() << " -> " << cfg.out.string() << " ("
      << out.samples.size() << " samples at " << out.sample_rate << " Hz)\n";
  return out;
}

metrics::EvalReport cmd_evaluate(const RunConfig& cfg, std::ostream& msg) {
  require_dir(cfg.clean_dir, "clean-dir");
  require_dir(cfg.noisy_dir, "noisy-dir");
  require_dir(cfg.out, "out");
  const auto scan = data::scan_dataset(cfg.clean_dir, cfg.noisy_dir);
  for (const auto& name : scan.unmatched) msg << "warning: unmatched file " << name << '\n';

  std::optional<model::Checkpoint> ckpt;
  metrics::Enhancer enhancer = [](const dsp::Waveform& w) { return w; };
  if (!cfg.bypass_model) {
    require_dir(cfg.checkpoint, "checkpoint");
    ckpt = model::load_checkpoint(cfg.checkpoint);
    enhancer = [&ckpt](const dsp::Waveform& w) { return model::enhance(ckpt->model, w); };
  }
  fs::create_directories(cfg.out);
  metrics::EvalOptions opts;
  opts.wav_dir = cfg.out / "enhanced";
  opts.threads = cfg.threads;
  auto report = metrics::evaluate_set(scan.manifest, enhancer, opts);
  report.config["checkpoint"] = cfg.bypass_model ? "none" : cfg.checkpoint.string();
  report.config["bypass-model"] = cfg.bypass_model ? "true" : "false";
  report.config["clean-dir"] = cfg.clean_dir.string();
  report.config["noisy-dir"] = cfg.noisy_dir.string();
  metrics::write_report(report, cfg.out / "report.tsv");
  msg << metrics::summary_text(report);
  return report;
}

void print_spike_stats(const core::SpikeStats& stats, std::ostream& out) {
  out << "layer\tneurons\ttimesteps\tspikes\tfiring_rate\n";
  for (const auto& l : stats.layers) {
    out << l.name << '\t' << l.neurons << '\t' << l.timesteps << '\t' << l.spikes << '\t'
        << util::format_double(l.firing_rate) << '\n';
  }
  out << "target\tsynops\n";
  for (const auto& s : stats.synops) out << s.target << '\t' << s.synops << '\n';
  out << "total_synops\t" << stats.total_synops << '\n';
}

core::SpikeStats cmd_spike_stats(const RunConfig& cfg, std::ostream& msg) {
  require_dir(cfg.checkpoint, "checkpoint");
  require_dir(cfg.input, "input");
  const auto ckpt = model::load_checkpoint(cfg.checkpoint);
  core::SpikeRecord record;
  model::enhance(ckpt.model, dsp::read_wav(cfg.input), &record);
  const auto stats = core::spike_stats(record);
  print_spike_stats(stats, msg);
  return stats;
}

}  // namespace snnse::cli
