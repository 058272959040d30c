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

// Candidate selection and pair ranking: the joint score of a (target,
// reference) pair is target score x reference score x relation probability,
// times a penalty for each member whose 3D lift failed.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srg/error.hpp"
#include "srg/features.hpp"
#include "srg/geometry.hpp"
#include "srg/srm.hpp"
#include "srg/types.hpp"

namespace srg {

enum class DetectorProfile { Detic, GroundingDino };

DetectorProfile detector_profile_from_string(const std::string& s);

struct RankingConfig {
  std::size_t k = 3;
  DetectorProfile profile = DetectorProfile::Detic;
  double detic_score_threshold = 0.02;
  double gdino_box_threshold = 0.15;
  /// Token-level threshold; applied by the detector bridge, recorded here so
  /// one config describes a run.
  double gdino_text_threshold = 0.10;
  double degenerate_penalty = 0.5;
  /// Exclude pairs with a failed lift instead of penalising them.
  bool strict = false;

  double score_threshold() const {
    return profile == DetectorProfile::Detic ? detic_score_threshold : gdino_box_threshold;
  }
  void validate() const;

  /// k = 3, detic thresholds.
  static RankingConfig semantic_abstraction();
  /// k = 10, detic thresholds.
  static RankingConfig avd();
};

enum class Role { Target, Reference };
std::string to_string(Role role);

/// A grounding failure attributed to the role that caused it.
class GroundingError : public Error {
 public:
  GroundingError(ErrorKind kind, Role role, const std::string& message)
      : Error(kind, to_string(role) + ": " + message), role_(role) {}
  Role role() const noexcept { return role_; }

 private:
  Role role_;
};

/// Score >= threshold, sorted by (score desc, x asc, y asc), truncated to k.
/// Throws NoCandidates (GroundingError) when nothing passes.
std::vector<Detection2D> select_candidates(std::span<const Detection2D> detections,
                                           const RankingConfig& cfg, Role role = Role::Target);

struct Candidate {
  Detection2D detection;
  LiftedBox lift;
};

struct PairScore {
  std::size_t target_index = 0;
  std::size_t reference_index = 0;
  double target_score = 0.0;
  double reference_score = 0.0;
  double relation_prob = 0.0;
  double penalty = 1.0;
  double joint = 0.0;
  bool excluded = false;
};

struct GroundingResult {
  Detection2D target;
  Detection2D reference;
  double joint_score = 0.0;
  double relation_prob = 0.0;
  std::vector<PairScore> per_pair_table;  // filled when requested
};

/// P(relation | target candidate, reference candidate).
using RelationScorer = std::function<double(const Candidate& target, const Candidate& reference)>;

/// Exhaustive argmax over all admissible pairs. A detection is never paired
/// with itself (same label and bbox). Ties fall to higher target score, then
/// higher reference score, then the lexicographically smaller target and
/// reference boxes.
GroundingResult rank_pairs(std::span<const Candidate> targets, std::span<const Candidate> references,
                           const RelationScorer& scorer, const RankingConfig& cfg,
                           bool keep_table = false);

/// Relation scorer backed by the relation classifier: builds the feature the
/// model expects and returns the probability of `relation`.
class SrmScorer {
 public:
  SrmScorer(const MlpParams& model, const std::string& relation, const std::string& target_label,
            const std::string& reference_label, const CameraIntrinsics& intrinsics,
            const EmbeddingTable* embeddings = nullptr);

  double operator()(const Candidate& target, const Candidate& reference) const;

 private:
  const MlpParams* model_;
  std::size_t relation_index_;
  std::string target_label_, reference_label_;
  CameraIntrinsics intrinsics_;
  const EmbeddingTable* embeddings_;
};

/// Builds the model's input feature for a candidate pair.
FeatureVector pair_features(FeatureSchema schema, const Candidate& target, const Candidate& reference,
                            const std::string& target_label, const std::string& reference_label,
                            const CameraIntrinsics& intrinsics, const EmbeddingTable* embeddings);

struct GroundOptions {
  RankingConfig ranking;
  LiftConfig lift;
  bool explain = false;
};

/// select_candidates per role -> lift each candidate -> rank_pairs.
GroundingResult ground(const SceneManifest& scene, const DepthImage& depth, const Expression& expr,
                       const MlpParams& model, const GroundOptions& opts,
                       const EmbeddingTable* embeddings = nullptr);

/// Highest-scoring target candidate alone (detector-only baseline).
Detection2D ground_detector_only(const SceneManifest& scene, const Expression& expr,
                                 const RankingConfig& cfg);

}  // namespace srg
