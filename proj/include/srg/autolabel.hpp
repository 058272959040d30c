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

// Geometric relation labelling of lifted object pairs and the expression
// generator built on it.

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srg/geometry.hpp"
#include "srg/types.hpp"

namespace srg {

struct RelationRuleConfig {
  double margin_fraction = 0.5;
  double max_pair_distance_m = 3.0;
  double support_gap_m = 0.05;
  double containment_fraction = 0.9;

  void validate() const;
};

/// Relations that hold for target w.r.t. reference. With d = T_t - T_r and
/// m_a = margin_fraction * mean of the two boxes' axis-aligned half-extents
/// along camera axis a:
///   left: d.x < -m_x   right: d.x > m_x
///   above: d.y < -m_y  below: d.y > m_y        (y points down)
///   in front of: d.z < -m_z   behind: d.z > m_z
///   on: target rests on reference (gap <= support_gap, center over footprint)
///   in: >= containment_fraction of the target hull lies inside the reference hull
/// Only vocabulary members are reported, in vocabulary order. Multiclass
/// vocabularies get at most one label: in, then on, then the directional label
/// with the largest |d_a| / m_a.
std::vector<std::string> relation_oracle(const OrientedBox3D& target, const OrientedBox3D& reference,
                                         const RelationRuleConfig& cfg,
                                         const RelationVocabulary& vocab);

/// One object available to the labeller.
struct LabeledObject {
  std::string label;
  BBox2D bbox;
  double score = 1.0;
  OrientedBox3D box;
  bool degenerate = false;
};

/// Every ordered pair (i != j) closer than max_pair_distance_m contributes one
/// expression per oracle relation; duplicates of (target, relation,
/// reference) collapse onto the pair with the highest score product, and the
/// other target boxes are kept as alternatives. Degenerate lifts are skipped.
std::vector<Expression> generate_expressions(const std::vector<LabeledObject>& objects,
                                             const RelationRuleConfig& cfg,
                                             const RelationVocabulary& vocab);

/// Objects of a scene: its ground-truth objects when present, otherwise every
/// detection. Each is lifted from the depth image.
std::vector<LabeledObject> lift_scene_objects(const SceneManifest& scene, const DepthImage& depth,
                                              const LiftConfig& cfg = {});

struct BuildSummary {
  std::size_t scenes_ok = 0;
  std::size_t scenes_failed = 0;
  std::size_t expression_count = 0;
  std::map<std::string, std::size_t> relation_counts;
  std::vector<std::string> errors;
};

/// Labels each manifest (lift -> fit -> oracle), writes the updated manifests
/// plus index.json into out_dir. Failed scenes are reported and skipped;
/// throws EmptyDataset if no scene succeeds.
BuildSummary build_dataset(const std::vector<SceneManifest>& scenes, const RelationRuleConfig& cfg,
                           const std::filesystem::path& out_dir, const LiftConfig& lift = {},
                           int threads = 1);

}  // namespace srg
