#include "snnse/model/checkpoint.hpp"

#include "snnse/error.hpp"
#include "snnse/model/container.hpp"
#include "snnse/util/kv.hpp"

namespace snnse::model {

void save_checkpoint(const Model<float>& model, const std::filesystem::path& path,
                     const SeedRecord& seeds, const TrainingState* training) {
  Container c;
  c.metadata["kind"] = "checkpoint";
  for (const auto& [k, v] : util::parse_key_values(model.config().to_text())) {
    c.metadata["model." + k] = v;
  }
  c.metadata["seed.model"] = std::to_string(seeds.model);
  c.metadata["seed.split"] = std::to_string(seeds.split);
  c.metadata["seed.data"] = std::to_string(seeds.data);
  c.put("norm.mean", Tensor<double>({1}, model.normalization().mean));
  c.put("norm.std", Tensor<double>({1}, model.normalization().std));
  const auto params = model.parameters();
  for (const auto& p : params) c.put(p.name, *p.value);
  if (training) {
    c.metadata["train.epoch"] = std::to_string(training->epoch);
    c.metadata["train.best_val_lsd"] = util::format_double(training->best_val_lsd);
    c.metadata["adam.step"] = std::to_string(training->adam.step);
    const auto& adam = training->adam;
    if (!adam.first_moment.empty()) {
      if (adam.first_moment.size() != params.size()) {
        throw CheckpointError("optimizer state does not match the model");
      }
      for (std::size_t i = 0; i < params.size(); ++i) {
        c.put("adam.m." + params[i].name, adam.first_moment[i]);
        c.put("adam.v." + params[i].name, adam.second_moment[i]);
      }
    }
  }
  write_container(c, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const Container c = read_container(path);
  if (c.metadata.count("kind") == 0 || c.meta("kind") != "checkpoint") {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  std::string config_text;
  for (const auto& [k, v] : c.metadata) {
    if (k.rfind("model.", 0) == 0) config_text += k.substr(6) + "=" + v + "\n";
  }
  ModelConfig cfg;
  try {
    cfg = ModelConfig::from_text(config_text);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid model config: ") + e.what());
  }

  Checkpoint out{Model<float>::build(cfg, 0), {}, std::nullopt};
  for (auto& p : out.model.parameters()) {
    auto t = c.get_f32(p.name);
    if (t.shape() != p.value->shape()) {
      throw CheckpointError("tensor '" + p.name + "' has shape " + engine::to_string(t.shape()) +
                            ", config expects " + engine::to_string(p.value->shape()));
    }
    *p.value = std::move(t);
  }
  NormalizationStats norm{c.get_f64("norm.mean")[0], c.get_f64("norm.std")[0]};
  try {
    out.model.set_normalization(norm);
  } catch (const DomainError& e) {
    throw CheckpointError(e.what());
  }
  out.seeds.model = util::parse_u64("seed.model", c.meta("seed.model"));
  out.seeds.split = util::parse_u64("seed.split", c.meta("seed.split"));
  out.seeds.data = util::parse_u64("seed.data", c.meta("seed.data"));

  if (c.metadata.count("adam.step")) {
    TrainingState ts;
    ts.epoch = util::parse_u64("train.epoch", c.meta("train.epoch"));
    ts.best_val_lsd = util::parse_double("train.best_val_lsd", c.meta("train.best_val_lsd"));
    ts.adam.step = util::parse_u64("adam.step", c.meta("adam.step"));
    if (c.find("adam.m." + out.model.parameters().front().name)) {
      for (const auto& p : out.model.parameters()) {
        ts.adam.first_moment.push_back(c.get_f32("adam.m." + p.name));
        ts.adam.second_moment.push_back(c.get_f32("adam.v." + p.name));
      }
    }
    out.training = std::move(ts);
  }
  return out;
}

}  // namespace snnse::model
