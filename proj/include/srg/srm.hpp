// Copyright 2026 The SRG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Spatial relation classifier: three affine layers with ReLU between them,
// softmax (multiclass) or per-class sigmoid (multilabel) on top, trained with
// Adam and a step learning-rate schedule.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srg/features.hpp"
#include "srg/types.hpp"

namespace srg {

struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> bias;     // outputs

  DenseLayer() = default;
  DenseLayer(std::size_t in, std::size_t out)
      : inputs(in), outputs(out), weights(in * out, 0.0), bias(out, 0.0) {}

  bool operator==(const DenseLayer&) const = default;
};

inline constexpr std::size_t kMlpLayers = 3;
using LayerStack = std::array<DenseLayer, kMlpLayers>;

struct MlpParams {
  LayerStack layers;
  FeatureSchema schema = FeatureSchema::Geom3D;
  std::size_t embedding_dim = 0;
  RelationVocabulary vocabulary;

  std::size_t input_dim() const { return layers[0].inputs; }
  std::size_t output_dim() const { return layers[kMlpLayers - 1].outputs; }
  std::array<std::size_t, 2> hidden_dims() const { return {layers[0].outputs, layers[1].outputs}; }
  RelationMode mode() const { return vocabulary.mode(); }

  /// Shape chain, output size == vocabulary size, input size == schema length.
  void validate() const;

  bool operator==(const MlpParams&) const = default;
};

/// Zero weights and biases.
MlpParams make_mlp(FeatureSchema schema, std::size_t embedding_dim,
                   std::array<std::size_t, 2> hidden, const RelationVocabulary& vocabulary);

/// Uniform(+-sqrt(6 / (fan_in + fan_out))) weights from the seeded generator,
/// zero biases.
MlpParams init_mlp(FeatureSchema schema, std::size_t embedding_dim,
                   std::array<std::size_t, 2> hidden, const RelationVocabulary& vocabulary,
                   std::uint64_t seed);

struct RelationDistribution {
  std::vector<double> probs;
  RelationMode mode = RelationMode::Multiclass;
};

std::vector<double> mlp_logits(const MlpParams& params, const FeatureVector& x);

/// Throws SchemaMismatch when x was built for a different schema or length.
RelationDistribution forward(const MlpParams& params, const FeatureVector& x);

/// Relation indices by descending probability; equal probabilities keep
/// vocabulary order.
std::vector<std::size_t> ranked_relations(const RelationDistribution& dist);

struct Sample {
  FeatureVector x;
  /// Exactly one index for multiclass; one or more for multilabel.
  std::vector<std::size_t> labels;
};

struct SampleSet {
  FeatureSchema schema = FeatureSchema::Geom3D;
  std::size_t embedding_dim = 0;
  RelationVocabulary vocabulary;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct LossAndGrad {
  double loss = 0.0;
  LayerStack grads;
};

/// Mean cross-entropy (multiclass) or mean per-class binary cross-entropy
/// (multilabel) over the batch, with exact gradients.
LossAndGrad loss_and_grad(const MlpParams& params, std::span<const Sample> batch);

class AdamOptimizer {
 public:
  AdamOptimizer(const MlpParams& shape, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8);

  void step(MlpParams& params, const LayerStack& grads, double lr);
  std::size_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  LayerStack m_, v_;
};

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr_decay = 0.5;
  int decay_every = 3;  // applied at the end of epochs 3, 6, 9, ...
  int epochs = 10;
  std::size_t batch_size = 64;
  std::array<std::size_t, 2> hidden{64, 32};
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // percentage, top-1
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  MlpParams params;
  std::vector<EpochLog> log;
};

/// Deterministic for a given seed and data order. The returned weights are
/// rounded to float32 so that they survive save_model / load_model exactly.
TrainResult train(const TrainConfig& cfg, const SampleSet& data, const SampleSet* val = nullptr);

/// Mean loss of the whole set (no gradients).
double evaluate_loss(const MlpParams& params, const SampleSet& data);

/// Percentage of samples with a true relation among the k most probable.
double topk_accuracy(const MlpParams& params, const SampleSet& data, std::size_t k);

inline constexpr std::uint32_t kModelVersion = 1;

std::vector<std::uint8_t> serialize_model(const MlpParams& params);
MlpParams deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_model(const std::filesystem::path& path);

}  // namespace srg
