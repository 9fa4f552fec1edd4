#include "snnse/cli/run_config.hpp"

#include <fstream>
#include <sstream>

#include "snnse/error.hpp"
#include "snnse/util/kv.hpp"

namespace snnse::cli {

void RunConfig::apply(const std::map<std::string, std::string>& values) {
  using util::parse_bool;
  using util::parse_double;
  using util::parse_int;
  std::map<std::string, std::string> model_keys;
  for (const auto& [key, value] : values) {
    if (key == "clean-dir") clean_dir = value;
    else if (key == "noisy-dir") noisy_dir = value;
    else if (key == "checkpoint") checkpoint = value;
    else if (key == "out") out = value;
    else if (key == "input") input = value;
    else if (key == "epochs") epochs = parse_int(key, value);
    else if (key == "batch") batch = parse_int(key, value);
    else if (key == "lr") lr = parse_double(key, value);
    else if (key == "seed") seed = util::parse_u64(key, value);
    else if (key == "segment-frames") segment_frames = parse_int(key, value);
    else if (key == "detach-reset") model_keys["detach_reset"] = value;
    else if (key == "val-fraction") val_fraction = parse_double(key, value);
    else if (key == "norm-cap") norm_cap = util::parse_u64(key, value);
    else if (key == "threads") threads = static_cast<unsigned>(parse_int(key, value));
    else if (key == "steps") steps = parse_int(key, value);
    else if (key == "overfit") overfit = parse_bool(key, value);
    else if (key == "bypass-model") bypass_model = parse_bool(key, value);
    else if (key.rfind("model.", 0) == 0) model_keys[key.substr(6)] = value;
    else throw ConfigError("unknown key '" + key + "'");
  }
  if (!model_keys.empty()) {
    auto merged = util::parse_key_values(model.to_text());
    // A new layer count makes the stored per-layer lists stale.
    for (const char* side : {"encoder", "decoder"}) {
      const std::string prefix(side);
      if (!model_keys.count(prefix + ".channels")) continue;
      for (const char* field : {".kernels", ".strides"}) {
        if (!model_keys.count(prefix + field)) merged.erase(prefix + field);
      }
    }
    for (const auto& [k, v] : model_keys) merged[k] = v;
    std::ostringstream text;
    for (const auto& [k, v] : merged) text << k << '=' << v << '\n';
    model = model::ModelConfig::from_text(text.str());
  }
}

void RunConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (segment_frames < 1) throw ConfigError("segment-frames must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val-fraction must lie in (0, 1)");
  if (threads < 1) throw ConfigError("threads must be >= 1");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  model.validate();
}

model::SeedRecord RunConfig::seeds() const {
  return {util::mix_seed(seed, 1), util::mix_seed(seed, 2), util::mix_seed(seed, 3)};
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> e;
  e["seed"] = std::to_string(seed);
  e["epochs"] = std::to_string(epochs);
  e["batch"] = std::to_string(batch);
  e["lr"] = util::format_double(lr);
  e["segment-frames"] = std::to_string(segment_frames);
  e["val-fraction"] = util::format_double(val_fraction);
  e["norm-cap"] = std::to_string(norm_cap);
  e["overfit"] = overfit ? "true" : "false";
  e["steps"] = std::to_string(steps);
  e["bypass-model"] = bypass_model ? "true" : "false";
  for (const auto& [k, v] : util::parse_key_values(model.to_text())) e["model." + k] = v;
  return e;
}

RunConfig load_run_config(const fs::path& file) {
  std::ifstream f(file);
  if (!f) throw ConfigError("cannot read config file " + file.string());
  std::stringstream text;
  text << f.rdbuf();
  RunConfig cfg;
  cfg.apply(util::parse_key_values(text.str()));
  return cfg;
}

}  // namespace snnse::cli
