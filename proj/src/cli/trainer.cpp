#include "snnse/cli/trainer.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "snnse/engine/loss.hpp"
#include "snnse/engine/ops.hpp"
#include "snnse/engine/tape.hpp"
#include "snnse/error.hpp"

namespace snnse::cli {

Trainer::Trainer(model::Model<float>& model, engine::AdamConfig config, unsigned threads)
    : model_(model), adam_(config), threads_(std::max(1u, threads)) {}

double Trainer::step(const std::vector<TrainingPair>& items) {
  if (items.empty()) throw ConfigError("empty batch");
  const std::size_t n = items.size();
  std::vector<std::vector<engine::Tensor<float>>> grads(n);
  std::vector<double> losses(n, 0.0);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        grads[i] = model_.zero_gradients();
        engine::Tape<float> tape;
        const auto est = model_.forward_graph(tape, *items[i].noisy, grads[i]);
        const auto loss = engine::lsd(tape, est, *items[i].clean);
        losses[i] = engine::lsd_value(tape.value(est), *items[i].clean);
        tape.backward(loss);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(threads_, n);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) throw InternalError("batch item " + std::to_string(i) + ": " + errors[i]);
  }

  double loss_sum = 0.0;
  for (double l : losses) loss_sum += l;
  const double mean_loss = loss_sum / static_cast<double>(n);
  if (!std::isfinite(mean_loss)) {
    throw NumericError("non-finite training loss at step " +
                       std::to_string(adam_.state().step + 1));
  }

  auto params = model_.parameters();
  std::vector<engine::Tensor<float>> mean_grads;
  mean_grads.reserve(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) {
    std::vector<double> acc(params[p].value->size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& g = grads[i][p];
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += g[j];
    }
    engine::Tensor<float> m(params[p].value->shape());
    for (std::size_t j = 0; j < acc.size(); ++j) {
      m[j] = static_cast<float>(acc[j] / static_cast<double>(n));
    }
    mean_grads.push_back(std::move(m));
  }
  std::vector<engine::Tensor<float>*> values;
  std::vector<const engine::Tensor<float>*> grad_ptrs;
  for (std::size_t p = 0; p < params.size(); ++p) {
    values.push_back(params[p].value);
    grad_ptrs.push_back(&mean_grads[p]);
  }
  adam_.step(values, grad_ptrs);
  model_.clamp_neuron_params();
  return mean_loss;
}

double validation_lsd(const model::Model<float>& model, const data::DatasetManifest& val,
                      data::FeatureStore& store) {
  if (val.pairs.empty()) throw DatasetError("empty validation set");
  double total = 0.0;
  for (const auto& pair : val.pairs) {
    const auto& f = store.load(pair);
    total += engine::lsd_value(model.forward(f.noisy), f.clean);
  }
  return total / static_cast<double>(val.pairs.size());
}

}  // namespace snnse::cli
