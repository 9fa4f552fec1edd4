#pragma once

#include <vector>

#include "snnse/data/dataset.hpp"
#include "snnse/engine/adam.hpp"
#include "snnse/model/unet.hpp"

namespace snnse::cli {

struct TrainingPair {
  const engine::Tensor<float>* noisy;  // {T, bins} raw LPS
  const engine::Tensor<float>* clean;
};

// One optimizer step per call: every item gets its own tape and gradient
// set, gradients are summed in double in item order and averaged, then
// Adam updates the model and neuron parameters are clamped. Results do not
// depend on the thread count.
class Trainer {
 public:
  Trainer(model::Model<float>& model, engine::AdamConfig config = {}, unsigned threads = 1);

  // Returns the mean LSD of the items before the update. Throws
  // NumericError (model untouched) on a non-finite loss or gradient.
  double step(const std::vector<TrainingPair>& items);

  engine::Adam<float>& optimizer() { return adam_; }
  const engine::Adam<float>& optimizer() const { return adam_; }

 private:
  model::Model<float>& model_;
  engine::Adam<float> adam_;
  unsigned threads_;
};

// Mean LSD over whole utterances with the inference path.
double validation_lsd(const model::Model<float>& model, const data::DatasetManifest& val,
                      data::FeatureStore& store);

}  // namespace snnse::cli
