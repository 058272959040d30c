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

#include "srg/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace srg {

DetectorProfile detector_profile_from_string(const std::string& s) {
  if (s == "detic") return DetectorProfile::Detic;
  if (s == "gdino" || s == "groundingdino") return DetectorProfile::GroundingDino;
  throw Error(ErrorKind::Validation, "unknown detector profile '" + s + "'");
}

void RankingConfig::validate() const {
  if (k < 1) throw Error(ErrorKind::Validation, "ranking.k must be >= 1");
  for (double t : {detic_score_threshold, gdino_box_threshold, gdino_text_threshold}) {
    if (!(t >= 0 && t <= 1)) throw Error(ErrorKind::Validation, "ranking thresholds must lie in [0,1]");
  }
  if (!(degenerate_penalty >= 0 && degenerate_penalty <= 1)) {
    throw Error(ErrorKind::Validation, "ranking.degenerate_penalty must lie in [0,1]");
  }
}

RankingConfig RankingConfig::semantic_abstraction() {
  RankingConfig c;
  c.k = 3;
  return c;
}

RankingConfig RankingConfig::avd() {
  RankingConfig c;
  c.k = 10;
  return c;
}

std::string to_string(Role role) { return role == Role::Target ? "target" : "reference"; }

std::vector<Detection2D> select_candidates(std::span<const Detection2D> detections,
                                           const RankingConfig& cfg, Role role) {
  cfg.validate();
  std::vector<Detection2D> out;
  for (const auto& d : detections) {
    if (d.score >= cfg.score_threshold()) out.push_back(d);
  }
  if (out.empty()) {
    throw GroundingError(ErrorKind::NoCandidates, role, "no detection reaches the score threshold");
  }
  std::stable_sort(out.begin(), out.end(), [](const Detection2D& a, const Detection2D& b) {
    return std::tie(b.score, a.bbox.x, a.bbox.y) < std::tie(a.score, b.bbox.x, b.bbox.y);
  });
  if (out.size() > cfg.k) out.resize(cfg.k);
  return out;
}

namespace {

bool same_detection(const Detection2D& a, const Detection2D& b) {
  return a.label == b.label && a.bbox == b.bbox;
}

/// True when a should win over b.
bool better(const PairScore& a, const PairScore& b, std::span<const Candidate> targets,
            std::span<const Candidate> refs) {
  if (a.joint != b.joint) return a.joint > b.joint;
  if (a.target_score != b.target_score) return a.target_score > b.target_score;
  if (a.reference_score != b.reference_score) return a.reference_score > b.reference_score;
  const BBox2D& ta = targets[a.target_index].detection.bbox;
  const BBox2D& tb = targets[b.target_index].detection.bbox;
  if (ta != tb) return ta < tb;
  const BBox2D& ra = refs[a.reference_index].detection.bbox;
  const BBox2D& rb = refs[b.reference_index].detection.bbox;
  if (ra != rb) return ra < rb;
  return std::tie(a.target_index, a.reference_index) < std::tie(b.target_index, b.reference_index);
}

}  // namespace

GroundingResult rank_pairs(std::span<const Candidate> targets, std::span<const Candidate> references,
                           const RelationScorer& scorer, const RankingConfig& cfg, bool keep_table) {
  if (targets.empty()) throw GroundingError(ErrorKind::NoCandidates, Role::Target, "no candidates");
  if (references.empty()) {
    throw GroundingError(ErrorKind::NoCandidates, Role::Reference, "no candidates");
  }
  std::vector<PairScore> table;
  table.reserve(targets.size() * references.size());
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    for (std::size_t j = 0; j < references.size(); ++j) {
      const Candidate& t = targets[i];
      const Candidate& r = references[j];
      PairScore ps;
      ps.target_index = i;
      ps.reference_index = j;
      ps.target_score = t.detection.score;
      ps.reference_score = r.detection.score;
      const bool degenerate = t.lift.degenerate || r.lift.degenerate;
      ps.excluded = same_detection(t.detection, r.detection) || (cfg.strict && degenerate);
      if (!ps.excluded) {
        ps.relation_prob = scorer(t, r);
        if (t.lift.degenerate) ps.penalty *= cfg.degenerate_penalty;
        if (r.lift.degenerate) ps.penalty *= cfg.degenerate_penalty;
        ps.joint = ps.target_score * ps.reference_score * ps.relation_prob * ps.penalty;
        if (!best || better(ps, table[*best], targets, references)) best = table.size();
      }
      table.push_back(ps);
    }
  }
  if (!best) throw GroundingError(ErrorKind::NoValidPairs, Role::Target, "every pair was excluded");
  const PairScore& win = table[*best];
  GroundingResult res;
  res.target = targets[win.target_index].detection;
  res.reference = references[win.reference_index].detection;
  res.joint_score = win.joint;
  res.relation_prob = win.relation_prob;
  if (keep_table) res.per_pair_table = std::move(table);
  return res;
}

// ---------------------------------------------------------------------------

FeatureVector pair_features(FeatureSchema schema, const Candidate& target, const Candidate& reference,
                            const std::string& target_label, const std::string& reference_label,
                            const CameraIntrinsics& intrinsics, const EmbeddingTable* embeddings) {
  FeatureVector f = is_3d(schema)
                        ? feat3d(target.lift.box, reference.lift.box)
                        : feat2d(target.detection.bbox, reference.detection.bbox, intrinsics.width,
                                 intrinsics.height);
  if (uses_language(schema)) {
    if (!embeddings) {
      throw Error(ErrorKind::SchemaMismatch, to_string(schema) + " needs an embedding table");
    }
    f = with_language(f, target_label, reference_label, *embeddings);
  }
  return f;
}

SrmScorer::SrmScorer(const MlpParams& model, const std::string& relation,
                     const std::string& target_label, const std::string& reference_label,
                     const CameraIntrinsics& intrinsics, const EmbeddingTable* embeddings)
    : model_(&model),
      target_label_(target_label),
      reference_label_(reference_label),
      intrinsics_(intrinsics),
      embeddings_(embeddings) {
  const auto idx = model.vocabulary.index_of(relation);
  if (!idx) {
    throw Error(ErrorKind::Validation, "relation '" + relation + "' is not in the model vocabulary");
  }
  relation_index_ = *idx;
  if (uses_language(model.schema)) {
    if (!embeddings) throw Error(ErrorKind::SchemaMismatch, to_string(model.schema) + " needs an embedding table");
    if (embeddings->dimension() != model.embedding_dim) {
      throw Error(ErrorKind::SchemaMismatch, "embedding dimension differs from the model's");
    }
  }
}

double SrmScorer::operator()(const Candidate& target, const Candidate& reference) const {
  const FeatureVector f = pair_features(model_->schema, target, reference, target_label_,
                                        reference_label_, intrinsics_, embeddings_);
  return forward(*model_, f).probs[relation_index_];
}

namespace {

std::vector<Candidate> lift_candidates(const std::vector<Detection2D>& dets, const DepthImage& depth,
                                       const CameraIntrinsics& k, const LiftConfig& cfg,
                                       bool need_lift) {
  std::vector<Candidate> out;
  out.reserve(dets.size());
  for (const auto& d : dets) {
    Candidate c{d, {}};
    if (need_lift) c.lift = lift_region(depth, d.bbox, d.mask ? &*d.mask : nullptr, k, cfg);
    out.push_back(std::move(c));
  }
  return out;
}

const std::vector<Detection2D>& detections_for(const SceneManifest& scene, const std::string& label,
                                               Role role) {
  static const std::vector<Detection2D> kNone;
  auto it = scene.detections.find(label);
  if (it == scene.detections.end()) {
    throw GroundingError(ErrorKind::NoCandidates, role, "no detections for '" + label + "'");
  }
  return it->second.empty() ? kNone : it->second;
}

}  // namespace

GroundingResult ground(const SceneManifest& scene, const DepthImage& depth, const Expression& expr,
                       const MlpParams& model, const GroundOptions& opts,
                       const EmbeddingTable* embeddings) {
  const auto targets = select_candidates(detections_for(scene, expr.target_label, Role::Target),
                                         opts.ranking, Role::Target);
  const auto refs = select_candidates(detections_for(scene, expr.reference_label, Role::Reference),
                                      opts.ranking, Role::Reference);
  const bool need_lift = is_3d(model.schema);
  const auto tc = lift_candidates(targets, depth, scene.intrinsics, opts.lift, need_lift);
  const auto rc = lift_candidates(refs, depth, scene.intrinsics, opts.lift, need_lift);
  const SrmScorer scorer(model, expr.relation, expr.target_label, expr.reference_label,
                         scene.intrinsics, embeddings);
  return rank_pairs(tc, rc, std::cref(scorer), opts.ranking, opts.explain);
}

Detection2D ground_detector_only(const SceneManifest& scene, const Expression& expr,
                                 const RankingConfig& cfg) {
  return select_candidates(detections_for(scene, expr.target_label, Role::Target), cfg,
                           Role::Target)
      .front();
}

}  // namespace srg
