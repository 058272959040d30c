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

#include "srg/srm.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

#include "srg/error.hpp"
#include "srg/kernels.hpp"

namespace srg {

// ---------------------------------------------------------------------------
// Construction

void MlpParams::validate() const {
  for (std::size_t i = 0; i < kMlpLayers; ++i) {
    const DenseLayer& l = layers[i];
    if (l.inputs == 0 || l.outputs == 0 || l.weights.size() != l.inputs * l.outputs ||
        l.bias.size() != l.outputs) {
      throw Error(ErrorKind::Validation, "layer " + std::to_string(i) + " has inconsistent shape");
    }
    if (i + 1 < kMlpLayers && l.outputs != layers[i + 1].inputs) {
      throw Error(ErrorKind::Validation, "layer " + std::to_string(i) + " output does not feed layer " +
                                             std::to_string(i + 1));
    }
  }
  if (output_dim() != vocabulary.size()) {
    throw Error(ErrorKind::Validation, "output size must equal the vocabulary size");
  }
  if (input_dim() != feature_length(schema, embedding_dim)) {
    throw Error(ErrorKind::SchemaMismatch, "input size " + std::to_string(input_dim()) +
                                               " does not match schema " + to_string(schema));
  }
}

MlpParams make_mlp(FeatureSchema schema, std::size_t embedding_dim,
                   std::array<std::size_t, 2> hidden, const RelationVocabulary& vocabulary) {
  MlpParams p;
  p.schema = schema;
  p.embedding_dim = uses_language(schema) ? embedding_dim : 0;
  p.vocabulary = vocabulary;
  const std::size_t in = feature_length(schema, p.embedding_dim);
  p.layers[0] = DenseLayer(in, hidden[0]);
  p.layers[1] = DenseLayer(hidden[0], hidden[1]);
  p.layers[2] = DenseLayer(hidden[1], vocabulary.size());
  p.validate();
  return p;
}

MlpParams init_mlp(FeatureSchema schema, std::size_t embedding_dim,
                   std::array<std::size_t, 2> hidden, const RelationVocabulary& vocabulary,
                   std::uint64_t seed) {
  MlpParams p = make_mlp(schema, embedding_dim, hidden, vocabulary);
  std::mt19937_64 rng(seed);
  for (auto& l : p.layers) {
    const double a = std::sqrt(6.0 / static_cast<double>(l.inputs + l.outputs));
    std::uniform_real_distribution<double> dist(-a, a);
    for (auto& w : l.weights) w = dist(rng);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Forward / backward

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : z) v /= sum;
}

void check_input(const MlpParams& p, const FeatureVector& x) {
  if (x.schema != p.schema) {
    throw Error(ErrorKind::SchemaMismatch, "model expects " + to_string(p.schema) + ", got " +
                                               to_string(x.schema));
  }
  if (x.values.size() != p.input_dim()) {
    throw Error(ErrorKind::SchemaMismatch, "model expects " + std::to_string(p.input_dim()) +
                                               " inputs, got " + std::to_string(x.values.size()));
  }
}

/// Pre-activations and activations of one sample.
struct Trace {
  std::array<std::vector<double>, kMlpLayers> z;
  std::array<std::vector<double>, kMlpLayers - 1> h;
};

void run_layers(const MlpParams& p, std::span<const double> x, Trace& tr) {
  std::span<const double> in = x;
  for (std::size_t i = 0; i < kMlpLayers; ++i) {
    const DenseLayer& l = p.layers[i];
    tr.z[i].resize(l.outputs);
    kernels::affine(l.weights, l.bias, in, tr.z[i]);
    if (i + 1 < kMlpLayers) {
      tr.h[i].resize(l.outputs);
      for (std::size_t j = 0; j < l.outputs; ++j) tr.h[i][j] = std::max(0.0, tr.z[i][j]);
      in = tr.h[i];
    }
  }
}

LayerStack zeros_like(const LayerStack& layers) {
  LayerStack g;
  for (std::size_t i = 0; i < kMlpLayers; ++i) g[i] = DenseLayer(layers[i].inputs, layers[i].outputs);
  return g;
}

/// Loss of one sample from its logits; writes dL/dlogits (unscaled by batch).
double sample_loss(RelationMode mode, const std::vector<double>& logits,
                   const std::vector<std::size_t>& labels, std::vector<double>* dlogits) {
  const std::size_t c = logits.size();
  if (mode == RelationMode::Multiclass) {
    const std::size_t y = labels.front();
    std::vector<double> p = logits;
    softmax_inplace(p);
    const double mx = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double z : logits) lse += std::exp(z - mx);
    const double loss = mx + std::log(lse) - logits[y];
    if (dlogits) {
      *dlogits = p;
      (*dlogits)[y] -= 1.0;
    }
    return loss;
  }
  std::vector<double> target(c, 0.0);
  for (auto l : labels) target[l] = 1.0;
  double loss = 0.0;
  if (dlogits) dlogits->assign(c, 0.0);
  for (std::size_t j = 0; j < c; ++j) {
    loss += softplus(logits[j]) - target[j] * logits[j];
    if (dlogits) (*dlogits)[j] = (sigmoid(logits[j]) - target[j]) / static_cast<double>(c);
  }
  return loss / static_cast<double>(c);
}

void check_labels(const MlpParams& p, const Sample& s) {
  if (s.labels.empty()) throw Error(ErrorKind::Validation, "sample has no label");
  if (p.mode() == RelationMode::Multiclass && s.labels.size() != 1) {
    throw Error(ErrorKind::Validation, "multiclass samples carry exactly one label");
  }
  for (auto l : s.labels) {
    if (l >= p.output_dim()) throw Error(ErrorKind::Validation, "label index out of range");
  }
}

}  // namespace

std::vector<double> mlp_logits(const MlpParams& params, const FeatureVector& x) {
  check_input(params, x);
  Trace tr;
  run_layers(params, x.values, tr);
  return tr.z[kMlpLayers - 1];
}

RelationDistribution forward(const MlpParams& params, const FeatureVector& x) {
  RelationDistribution d;
  d.mode = params.mode();
  d.probs = mlp_logits(params, x);
  if (d.mode == RelationMode::Multiclass) {
    softmax_inplace(d.probs);
  } else {
    for (auto& v : d.probs) v = sigmoid(v);
  }
  return d;
}

std::vector<std::size_t> ranked_relations(const RelationDistribution& dist) {
  std::vector<std::size_t> idx(dist.probs.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return dist.probs[a] > dist.probs[b]; });
  return idx;
}

LossAndGrad loss_and_grad(const MlpParams& params, std::span<const Sample> batch) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "loss_and_grad needs at least one sample");
  LossAndGrad out;
  out.grads = zeros_like(params.layers);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Trace tr;
  std::vector<double> delta, dh;
  for (const Sample& s : batch) {
    check_input(params, s.x);
    check_labels(params, s);
    run_layers(params, s.x.values, tr);
    out.loss += sample_loss(params.mode(), tr.z[kMlpLayers - 1], s.labels, &delta);
    for (auto& d : delta) d *= inv_b;
    for (std::size_t i = kMlpLayers; i-- > 0;) {
      const DenseLayer& l = params.layers[i];
      std::span<const double> in = i == 0 ? std::span<const double>(s.x.values)
                                          : std::span<const double>(tr.h[i - 1]);
      kernels::outer_acc(out.grads[i].weights, delta, in);
      for (std::size_t j = 0; j < l.outputs; ++j) out.grads[i].bias[j] += delta[j];
      if (i == 0) break;
      dh.assign(l.inputs, 0.0);
      kernels::affine_transpose_acc(l.weights, delta, dh);
      for (std::size_t j = 0; j < l.inputs; ++j) {
        if (tr.z[i - 1][j] <= 0.0) dh[j] = 0.0;
      }
      delta.swap(dh);
    }
  }
  out.loss *= inv_b;
  return out;
}

// ---------------------------------------------------------------------------
// Optimizer and training loop

AdamOptimizer::AdamOptimizer(const MlpParams& shape, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(zeros_like(shape.layers)), v_(zeros_like(shape.layers)) {}

void AdamOptimizer::step(MlpParams& params, const LayerStack& grads, double lr) {
  ++t_;
  const kernels::AdamStep s{lr,
                            beta1_,
                            beta2_,
                            eps_,
                            1.0 - std::pow(beta1_, static_cast<double>(t_)),
                            1.0 - std::pow(beta2_, static_cast<double>(t_))};
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < kMlpLayers; ++i) {
    DenseLayer& p = params.layers[i];
    k.adam_update(p.weights.data(), grads[i].weights.data(), m_[i].weights.data(),
                  v_[i].weights.data(), p.weights.size(), s);
    k.adam_update(p.bias.data(), grads[i].bias.data(), m_[i].bias.data(), v_[i].bias.data(),
                  p.bias.size(), s);
  }
}

void TrainConfig::validate() const {
  if (!(lr > 0)) throw Error(ErrorKind::Validation, "train.lr must be > 0");
  if (epochs < 1) throw Error(ErrorKind::Validation, "train.epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::Validation, "train.batch_size must be >= 1");
  if (decay_every < 1) throw Error(ErrorKind::Validation, "train.decay_every must be >= 1");
  if (hidden[0] < 1 || hidden[1] < 1) throw Error(ErrorKind::Validation, "hidden sizes must be >= 1");
}

namespace {

void check_set(const SampleSet& set, const char* name) {
  if (set.empty()) throw Error(ErrorKind::EmptyDataset, std::string(name) + " has no samples");
  for (const auto& s : set.samples) {
    if (s.x.schema != set.schema) {
      throw Error(ErrorKind::SchemaMismatch, std::string(name) + " mixes feature schemas");
    }
  }
}

void round_to_float(MlpParams& p) {
  for (auto& l : p.layers) {
    for (auto& w : l.weights) w = static_cast<double>(static_cast<float>(w));
    for (auto& b : l.bias) b = static_cast<double>(static_cast<float>(b));
  }
}

}  // namespace

double evaluate_loss(const MlpParams& params, const SampleSet& data) {
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "evaluate_loss on an empty set");
  double total = 0.0;
  for (const auto& s : data.samples) {
    check_labels(params, s);
    total += sample_loss(params.mode(), mlp_logits(params, s.x), s.labels, nullptr);
  }
  return total / static_cast<double>(data.size());
}

TrainResult train(const TrainConfig& cfg, const SampleSet& data, const SampleSet* val) {
  cfg.validate();
  check_set(data, "training set");
  if (val) {
    check_set(*val, "validation set");
    if (val->schema != data.schema) {
      throw Error(ErrorKind::SchemaMismatch, "validation schema differs from training schema");
    }
  }
  TrainResult result;
  MlpParams& params = result.params;
  params = init_mlp(data.schema, data.embedding_dim, cfg.hidden, data.vocabulary, cfg.seed);
  AdamOptimizer adam(params, cfg.beta1, cfg.beta2, cfg.eps);
  // Shuffling draws from its own stream so initialisation and order are
  // independent.
  std::mt19937_64 order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Sample> batch;
  double lr = cfg.lr;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data.samples[order[i]]);
      LossAndGrad lg = loss_and_grad(params, batch);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      adam.step(params, lg.grads, lr);
    }
    EpochLog log;
    log.epoch = epoch;
    log.lr = lr;
    log.train_loss = loss_sum / static_cast<double>(data.size());
    log.train_accuracy = topk_accuracy(params, data, 1);
    if (val) {
      log.val_loss = evaluate_loss(params, *val);
      log.val_accuracy = topk_accuracy(params, *val, 1);
    }
    result.log.push_back(log);
    if (epoch % cfg.decay_every == 0) lr *= cfg.lr_decay;
  }
  round_to_float(params);
  return result;
}

double topk_accuracy(const MlpParams& params, const SampleSet& data, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::Validation, "k must be >= 1");
  if (data.empty()) throw Error(ErrorKind::EmptyDataset, "topk_accuracy on an empty set");
  std::size_t hits = 0;
  for (const auto& s : data.samples) {
    const auto ranked = ranked_relations(forward(params, s.x));
    const std::size_t kk = std::min(k, ranked.size());
    for (std::size_t i = 0; i < kk; ++i) {
      if (std::find(s.labels.begin(), s.labels.end(), ranked[i]) != s.labels.end()) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Model file: little-endian
//   "SRGM" | u32 version | str schema | u32 embedding_dim | u8 mode |
//   u32 n_relations | str relation... | u32 n_layers | u32 dims[n_layers + 1] |
//   per layer: f32 weights (row-major), f32 bias | u32 crc32 of all prior bytes
// where str = u32 length + bytes.

namespace {

constexpr char kMagic[4] = {'S', 'R', 'G', 'M'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    u32(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void raw(const char* p, std::size_t n) { buf_.insert(buf_.end(), p, p + n); }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw Error(ErrorKind::CorruptModel, "model file is truncated");
  }
  std::uint8_t u8() {
    need(1);
    return b_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b_[pos_++]) << (8 * i);
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > 1u << 20) throw Error(ErrorKind::CorruptModel, "implausible string length");
    need(n);
    std::string s(b_.begin() + static_cast<long>(pos_), b_.begin() + static_cast<long>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const MlpParams& params) {
  params.validate();
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kModelVersion);
  w.str(to_string(params.schema));
  w.u32(static_cast<std::uint32_t>(params.embedding_dim));
  w.u8(params.mode() == RelationMode::Multiclass ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(params.vocabulary.size()));
  for (const auto& n : params.vocabulary.names()) w.str(n);
  w.u32(static_cast<std::uint32_t>(kMlpLayers));
  w.u32(static_cast<std::uint32_t>(params.layers[0].inputs));
  for (const auto& l : params.layers) w.u32(static_cast<std::uint32_t>(l.outputs));
  for (const auto& l : params.layers) {
    for (double x : l.weights) w.f32(static_cast<float>(x));
    for (double x : l.bias) w.f32(static_cast<float>(x));
  }
  w.u32(checksum(w.bytes()));
  return std::move(w.bytes());
}

MlpParams deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorKind::CorruptModel, "not a model file");
  }
  Reader r(bytes.subspan(4));
  const std::uint32_t version = r.u32();
  if (version != kModelVersion) {
    throw Error(ErrorKind::VersionMismatch, "model version " + std::to_string(version) +
                                                ", expected " + std::to_string(kModelVersion));
  }
  if (bytes.size() < 12) throw Error(ErrorKind::CorruptModel, "model file is truncated");
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (tail.u32() != checksum(body)) throw Error(ErrorKind::CorruptModel, "checksum mismatch");

  Reader in(body.subspan(8));
  MlpParams p;
  try {
    p.schema = feature_schema_from_string(in.str());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::CorruptModel) throw;
    throw Error(ErrorKind::CorruptModel, e.what());
  }
  p.embedding_dim = in.u32();
  const RelationMode mode = in.u8() == 0 ? RelationMode::Multiclass : RelationMode::Multilabel;
  const std::uint32_t n_rel = in.u32();
  if (n_rel == 0 || n_rel > 1024) throw Error(ErrorKind::CorruptModel, "implausible vocabulary size");
  std::vector<std::string> names;
  for (std::uint32_t i = 0; i < n_rel; ++i) names.push_back(in.str());
  p.vocabulary = RelationVocabulary(names, mode);
  if (in.u32() != kMlpLayers) throw Error(ErrorKind::CorruptModel, "unexpected layer count");
  std::array<std::size_t, kMlpLayers + 1> dims{};
  for (auto& d : dims) {
    d = in.u32();
    if (d == 0 || d > (1u << 16)) throw Error(ErrorKind::CorruptModel, "implausible layer size");
  }
  for (std::size_t i = 0; i < kMlpLayers; ++i) {
    DenseLayer l(dims[i], dims[i + 1]);
    in.need(4 * (l.weights.size() + l.bias.size()));
    for (auto& x : l.weights) x = in.f32();
    for (auto& x : l.bias) x = in.f32();
    p.layers[i] = std::move(l);
  }
  if (in.pos() != body.size() - 8) throw Error(ErrorKind::CorruptModel, "trailing bytes in model");
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::CorruptModel, e.what());
  }
  return p;
}

void save_model(const MlpParams& params, const std::filesystem::path& path) {
  const auto bytes = serialize_model(params);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to '" + path.string() + "'");
}

MlpParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace srg
