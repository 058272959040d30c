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

// Relation-classifier training data built from labelled scenes, and its file
// format (JSON lines: a header object, then one {"x": [...], "labels": [...]}
// per sample).

#include <filesystem>
#include <string>
#include <vector>

#include "srg/autolabel.hpp"
#include "srg/features.hpp"
#include "srg/geometry.hpp"
#include "srg/srm.hpp"

namespace srg {

struct SampleBuildConfig {
  FeatureSchema schema = FeatureSchema::Geom3D;
  const EmbeddingTable* embeddings = nullptr;
  LiftConfig lift;
  RelationRuleConfig rules;
  int threads = 1;
};

/// One sample per ordered pair of non-degenerate objects within
/// rules.max_pair_distance_m whose oracle label set is non-empty. Labels come
/// from the relation oracle on the lifted boxes; features from the requested
/// schema. Scenes are visited in order, pairs in (target, reference) order.
SampleSet build_samples(const std::vector<SceneManifest>& scenes, const SampleBuildConfig& cfg);

std::string serialize_samples(const SampleSet& set);
SampleSet parse_samples(const std::string& text);
void save_samples(const SampleSet& set, const std::filesystem::path& path);
SampleSet load_samples(const std::filesystem::path& path);

/// Throws SchemaMismatch unless the set was built for `expected`.
void require_schema(const SampleSet& set, FeatureSchema expected);

}  // namespace srg
