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

#include "srg/samples.hpp"

#include <sstream>

#include <json.hpp>

#include "srg/dataio.hpp"
#include "srg/error.hpp"
#include "srg/parallel.hpp"
#include "srg/ranking.hpp"

namespace srg {

using nlohmann::json;

SampleSet build_samples(const std::vector<SceneManifest>& scenes, const SampleBuildConfig& cfg) {
  if (scenes.empty()) throw Error(ErrorKind::EmptyDataset, "no scenes to build samples from");
  if (uses_language(cfg.schema) && !cfg.embeddings) {
    throw Error(ErrorKind::SchemaMismatch, to_string(cfg.schema) + " needs an embedding table");
  }
  SampleSet set;
  set.schema = cfg.schema;
  set.embedding_dim = uses_language(cfg.schema) ? cfg.embeddings->dimension() : 0;
  set.vocabulary = scenes.front().vocabulary;

  std::vector<std::vector<Sample>> per_scene(scenes.size());
  parallel_for(scenes.size(), cfg.threads, [&](std::size_t s) {
    const SceneManifest& scene = scenes[s];
    if (!(scene.vocabulary == set.vocabulary)) {
      throw Error(ErrorKind::SchemaMismatch, scene.scene_id + ": relation vocabulary differs");
    }
    const DepthImage depth = load_depth(scene.resolve(scene.depth_path), scene.intrinsics.width,
                                        scene.intrinsics.height);
    const auto objects = lift_scene_objects(scene, depth, cfg.lift);
    for (std::size_t i = 0; i < objects.size(); ++i) {
      for (std::size_t j = 0; j < objects.size(); ++j) {
        const LabeledObject& t = objects[i];
        const LabeledObject& r = objects[j];
        if (i == j || t.degenerate || r.degenerate) continue;
        if ((t.box.T - r.box.T).norm() > cfg.rules.max_pair_distance_m) continue;
        const auto names = relation_oracle(t.box, r.box, cfg.rules, set.vocabulary);
        if (names.empty()) continue;
        Sample sample;
        for (const auto& n : names) sample.labels.push_back(*set.vocabulary.index_of(n));
        const Candidate ct{{t.label, t.score, t.bbox, std::nullopt}, {t.box, false, 0}};
        const Candidate cr{{r.label, r.score, r.bbox, std::nullopt}, {r.box, false, 0}};
        sample.x = pair_features(cfg.schema, ct, cr, t.label, r.label, scene.intrinsics, cfg.embeddings);
        per_scene[s].push_back(std::move(sample));
      }
    }
  });
  for (auto& v : per_scene) {
    for (auto& sample : v) set.samples.push_back(std::move(sample));
  }
  return set;
}

std::string serialize_samples(const SampleSet& set) {
  std::ostringstream out;
  json header = {{"schema", to_string(set.schema)},
                 {"embedding_dim", set.embedding_dim},
                 {"feature_length", feature_length(set.schema, set.embedding_dim)},
                 {"vocabulary", {{"names", set.vocabulary.names()}, {"mode", to_string(set.vocabulary.mode())}}},
                 {"count", set.samples.size()}};
  out << header.dump() << '\n';
  for (const auto& s : set.samples) out << json{{"x", s.x.values}, {"labels", s.labels}}.dump() << '\n';
  return out.str();
}

SampleSet parse_samples(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto where = [&] { return "samples line " + std::to_string(line_no); };
  SampleSet set;
  std::size_t length = 0;
  try {
    if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "samples file is empty");
    ++line_no;
    const json h = json::parse(line);
    set.schema = feature_schema_from_string(h.at("schema").get<std::string>());
    set.embedding_dim = h.at("embedding_dim").get<std::size_t>();
    set.vocabulary = RelationVocabulary(h.at("vocabulary").at("names").get<std::vector<std::string>>(),
                                        relation_mode_from_string(h.at("vocabulary").at("mode").get<std::string>()));
    length = feature_length(set.schema, set.embedding_dim);
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json j = json::parse(line);
      Sample s;
      s.x.schema = set.schema;
      s.x.values = j.at("x").get<std::vector<double>>();
      s.labels = j.at("labels").get<std::vector<std::size_t>>();
      if (s.x.values.size() != length) {
        throw Error(ErrorKind::SchemaMismatch, where() + ": feature length " +
                                                   std::to_string(s.x.values.size()) + ", expected " +
                                                   std::to_string(length));
      }
      if (s.labels.empty()) throw Error(ErrorKind::Validation, where() + ": labels is empty");
      for (std::size_t l : s.labels) {
        if (l >= set.vocabulary.size()) throw Error(ErrorKind::Validation, where() + ": label index out of range");
      }
      if (set.vocabulary.mode() == RelationMode::Multiclass && s.labels.size() != 1) {
        throw Error(ErrorKind::Validation, where() + ": multiclass sample needs exactly one label");
      }
      set.samples.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, where() + ": " + e.what());
  }
  return set;
}

void save_samples(const SampleSet& set, const std::filesystem::path& path) {
  write_text_file(path, serialize_samples(set));
}

SampleSet load_samples(const std::filesystem::path& path) { return parse_samples(read_text_file(path)); }

void require_schema(const SampleSet& set, FeatureSchema expected) {
  if (set.schema != expected) {
    throw Error(ErrorKind::SchemaMismatch, "samples were built for " + to_string(set.schema) +
                                               " but " + to_string(expected) + " was requested");
  }
}

}  // namespace srg
