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

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "../oracles/oracles.hpp"
#include "../test_util.hpp"
#include "srg/error.hpp"
#include "srg/srm.hpp"

using namespace srg;

namespace {

std::vector<Sample> random_batch(std::mt19937_64& rng, const MlpParams& p, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.x.schema = p.schema;
    s.x.values.resize(p.input_dim());
    for (auto& v : s.x.values) v = g(rng);
    if (p.mode() == RelationMode::Multiclass) {
      s.labels = {rng() % p.output_dim()};
    } else {
      for (std::size_t c = 0; c < p.output_dim(); ++c) {
        if (rng() % 2) s.labels.push_back(c);
      }
      if (s.labels.empty()) s.labels.push_back(0);
    }
  }
  return out;
}

// x-coordinate of the target decides left/right; depth decides behind/front.
SampleSet separable_set(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  SampleSet set;
  set.schema = FeatureSchema::Geom2D;
  set.vocabulary = RelationVocabulary({"left", "right", "behind", "in front of"}, RelationMode::Multilabel);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.x.schema = FeatureSchema::Geom2D;
    s.x.values.resize(8);
    for (auto& v : s.x.values) v = u(rng);
    s.labels.push_back(s.x.values[0] < s.x.values[4] ? 0 : 1);
    s.labels.push_back(s.x.values[2] > s.x.values[6] ? 2 : 3);
    set.samples.push_back(s);
  }
  return set;
}

}  // namespace

TEST_CASE("output distributions are valid") {
  for (auto vocab : {RelationVocabulary::avd(), RelationVocabulary::semantic_abstraction()}) {
    const MlpParams p = init_mlp(FeatureSchema::Geom3D, 0, {64, 32}, vocab, 4);
    std::mt19937_64 rng(1);
    for (const auto& s : random_batch(rng, p, 20)) {
      const auto d = forward(p, s.x);
      REQUIRE(d.probs.size() == 6);
      double sum = 0;
      for (double q : d.probs) {
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
        sum += q;
      }
      if (vocab.mode() == RelationMode::Multiclass) CHECK(sum == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("zero network losses") {
  const MlpParams mc = make_mlp(FeatureSchema::Geom3D, 0, {8, 4}, RelationVocabulary::semantic_abstraction());
  const MlpParams ml = make_mlp(FeatureSchema::Geom3D, 0, {8, 4}, RelationVocabulary::avd());
  std::mt19937_64 rng(2);
  CHECK(loss_and_grad(mc, random_batch(rng, mc, 5)).loss == doctest::Approx(std::log(6.0)));
  CHECK(loss_and_grad(ml, random_batch(rng, ml, 5)).loss == doctest::Approx(std::log(2.0)));
}

TEST_CASE("loss and gradients match the reference loss and finite differences") {
  for (auto vocab : {RelationVocabulary::avd(), RelationVocabulary::semantic_abstraction()}) {
    const MlpParams p = init_mlp(FeatureSchema::Geom2D, 0, {7, 5}, vocab, 13);
    std::mt19937_64 rng(8);
    const auto batch = random_batch(rng, p, 6);
    const LossAndGrad lg = loss_and_grad(p, batch);
    CHECK(lg.loss == doctest::Approx(oracle::loss(p, batch)).epsilon(1e-12));
    for (std::size_t l = 0; l < kMlpLayers; ++l) {
      for (std::size_t i = 0; i < p.layers[l].weights.size(); ++i) {
        const double fd = oracle::fd_grad(p, batch, l, false, i, 1e-6);
        CHECK(lg.grads[l].weights[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-7));
      }
      for (std::size_t i = 0; i < p.layers[l].bias.size(); ++i) {
        const double fd = oracle::fd_grad(p, batch, l, true, i, 1e-6);
        CHECK(lg.grads[l].bias[i] == doctest::Approx(fd).epsilon(1e-5).scale(1e-7));
      }
    }
  }
}

TEST_CASE("input validation") {
  const MlpParams p = make_mlp(FeatureSchema::Geom3D, 0, {4, 4}, RelationVocabulary::avd());
  FeatureVector wrong;
  wrong.schema = FeatureSchema::Geom2D;
  wrong.values.assign(8, 0.0);
  try {
    forward(p, wrong);
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaMismatch);
  }
  FeatureVector short_x;
  short_x.values.assign(29, 0.0);
  CHECK_THROWS_AS(forward(p, short_x), Error);
  try {
    loss_and_grad(p, {});
    FAIL("expected EmptyBatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyBatch);
  }
}

TEST_CASE("ranked relations break ties by vocabulary order") {
  RelationDistribution d{{0.2, 0.5, 0.5, 0.1}, RelationMode::Multilabel};
  CHECK(ranked_relations(d) == std::vector<std::size_t>{1, 2, 0, 3});
}

TEST_CASE("training learns a separable problem deterministically") {
  const SampleSet train_set = separable_set(2000, 1), test_set = separable_set(500, 2);
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.hidden = {32, 16};
  cfg.lr = 3e-3;
  const TrainResult a = train(cfg, train_set, &test_set);
  const TrainResult b = train(cfg, train_set, &test_set);
  CHECK(a.params == b.params);
  REQUIRE(a.log.size() == 10);
  CHECK(a.log.back().train_loss < a.log.front().train_loss);
  CHECK(a.log[0].lr == doctest::Approx(3e-3));
  CHECK(a.log[3].lr == doctest::Approx(1.5e-3));
  CHECK(a.log[9].lr == doctest::Approx(3e-3 / 8));
  CHECK(topk_accuracy(a.params, test_set, 1) > 95.0);
  CHECK(evaluate_loss(a.params, test_set) < 0.3);

  cfg.seed = 6;
  CHECK_FALSE(train(cfg, train_set).params == a.params);
}

TEST_CASE("model files roundtrip exactly and reject damage") {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.hidden = {8, 8};
  const MlpParams p = train(cfg, separable_set(100, 3)).params;
  testutil::TempDir dir("model");
  save_model(p, dir / "m.bin");
  CHECK(load_model(dir / "m.bin") == p);

  auto bytes = serialize_model(p);
  CHECK(deserialize_model(bytes) == p);

  auto flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x10;
  try {
    deserialize_model(flipped);
    FAIL("expected CorruptModel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CorruptModel);
  }
  auto truncated = bytes;
  truncated.resize(bytes.size() - 9);
  try {
    deserialize_model(truncated);
    FAIL("expected CorruptModel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CorruptModel);
  }
  auto versioned = bytes;
  versioned[4] = 99;  // version field follows the 4-byte magic
  try {
    deserialize_model(versioned);
    FAIL("expected VersionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::VersionMismatch);
  }
  CHECK_THROWS_AS(load_model(dir / "missing.bin"), Error);
}

TEST_CASE("training rejects empty or mixed data") {
  SampleSet empty;
  empty.vocabulary = RelationVocabulary::avd();
  CHECK_THROWS_AS(train(TrainConfig{}, empty), Error);
  SampleSet mixed = separable_set(10, 4);
  mixed.samples[3].x.schema = FeatureSchema::Geom3D;
  CHECK_THROWS_AS(train(TrainConfig{}, mixed), Error);
}
