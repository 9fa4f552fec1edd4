// snnse: train, enhance, evaluate, spike-stats.
#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "snnse/cli/commands.hpp"
#include "snnse/error.hpp"

namespace {

using snnse::cli::RunConfig;

// Options are collected as strings and applied over the config file so a
// flag always wins over the file, which wins over built-in defaults.
struct Flags {
  std::map<std::string, std::string> values;
  std::string config_file;
  std::vector<std::string> model_overrides;

  void add(CLI::App* app, const std::string& name, const std::string& help) {
    app->add_option("--" + name, values[name], help);
  }
  void add_flag(CLI::App* app, const std::string& name, const std::string& help) {
    app->add_option("--" + name, values[name], help)
        ->expected(0, 1)
        ->default_str("true")
        ->force_callback(false);
  }
};

RunConfig resolve(CLI::App* sub, Flags& flags) {
  RunConfig cfg;
  if (!flags.config_file.empty()) cfg = snnse::cli::load_run_config(flags.config_file);
  std::map<std::string, std::string> given;
  for (const auto& [name, value] : flags.values) {
    const auto* opt = sub->get_option_no_throw("--" + name);
    if (opt == nullptr || opt->count() == 0) continue;
    given[name] = value.empty() ? "true" : value;
  }
  for (const auto& kv : flags.model_overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw snnse::ConfigError("--model expects key=value, got " + kv);
    given["model." + kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  cfg.apply(given);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking U-Net speech enhancement"};
  app.require_subcommand(1);
  Flags flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config_file, "key=value config file");
    sub->add_option("--model", flags.model_overrides, "network override key=value (repeatable)");
    flags.add(sub, "checkpoint", "checkpoint file");
    flags.add(sub, "out", "output path");
    flags.add(sub, "threads", "worker threads");
  };

  auto* train = app.add_subcommand("train", "train a model");
  common(train);
  flags.add(train, "clean-dir", "directory of clean WAVs");
  flags.add(train, "noisy-dir", "directory of noisy WAVs with matching names");
  flags.add(train, "epochs", "training epochs (60)");
  flags.add(train, "batch", "batch size (32)");
  flags.add(train, "lr", "Adam learning rate (0.002)");
  flags.add(train, "seed", "base random seed");
  flags.add(train, "segment-frames", "training crop length in frames (126)");
  flags.add(train, "val-fraction", "validation fraction (0.05)");
  flags.add(train, "norm-cap", "utterances used for input statistics");
  flags.add(train, "steps", "overfit mode: optimizer steps (500)");
  flags.add_flag(train, "detach-reset", "stop gradients through the reset term");
  flags.add_flag(train, "overfit", "fit a fixed crop of one utterance");

  auto* enhance = app.add_subcommand("enhance", "enhance one WAV file");
  common(enhance);
  flags.add(enhance, "input", "noisy WAV (16 or 48 kHz)");

  auto* evaluate = app.add_subcommand("evaluate", "score a test set");
  common(evaluate);
  flags.add(evaluate, "clean-dir", "directory of clean WAVs");
  flags.add(evaluate, "noisy-dir", "directory of noisy WAVs with matching names");
  flags.add_flag(evaluate, "bypass-model", "score the noisy input unchanged");

  auto* spikes = app.add_subcommand("spike-stats", "firing rates and synaptic operations");
  common(spikes);
  flags.add(spikes, "input", "WAV file to analyse");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    auto* sub = app.get_subcommands().front();
    const RunConfig cfg = resolve(sub, flags);
    if (sub == train) {
      snnse::cli::cmd_train(cfg, std::cout);
    } else if (sub == enhance) {
      snnse::cli::cmd_enhance(cfg, std::cout);
    } else if (sub == evaluate) {
      snnse::cli::cmd_evaluate(cfg, std::cout);
    } else {
      snnse::cli::cmd_spike_stats(cfg, std::cout);
    }
  } catch (const snnse::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
