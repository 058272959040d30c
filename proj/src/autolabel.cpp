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

#include "srg/autolabel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "srg/dataio.hpp"
#include "srg/error.hpp"
#include "srg/parallel.hpp"

namespace srg {

namespace fs = std::filesystem;

void RelationRuleConfig::validate() const {
  if (!(margin_fraction > 0 && margin_fraction < 10)) {
    throw Error(ErrorKind::Validation, "rules.margin_fraction must lie in (0, 10)");
  }
  if (!(max_pair_distance_m > 0)) throw Error(ErrorKind::Validation, "rules.max_pair_distance_m must be > 0");
  if (!(support_gap_m > 0)) throw Error(ErrorKind::Validation, "rules.support_gap_m must be > 0");
  if (!(containment_fraction > 0 && containment_fraction <= 1)) {
    throw Error(ErrorKind::Validation, "rules.containment_fraction must lie in (0, 1]");
  }
}

namespace {

struct Hull {
  Eigen::Vector3d lo, hi;
};

Hull hull_of(const OrientedBox3D& b) {
  Eigen::Vector3d h(b.aabb_half_extent(0), b.aabb_half_extent(1), b.aabb_half_extent(2));
  return {b.T - h, b.T + h};
}

bool rests_on(const OrientedBox3D& t, const OrientedBox3D& r, double support_gap) {
  const Hull ht = hull_of(t), hr = hull_of(r);
  if (!(t.T.y() < r.T.y())) return false;
  const double gap = hr.lo.y() - ht.hi.y();  // y down: reference top minus target bottom
  if (std::abs(gap) > support_gap) return false;
  return t.T.x() >= hr.lo.x() && t.T.x() <= hr.hi.x() && t.T.z() >= hr.lo.z() && t.T.z() <= hr.hi.z();
}

bool contained_in(const OrientedBox3D& t, const OrientedBox3D& r, double fraction) {
  const Hull ht = hull_of(t), hr = hull_of(r);
  const Eigen::Vector3d size = ht.hi - ht.lo;
  const double vol = size.prod();
  if (!(vol > 0)) {
    return (t.T.array() > hr.lo.array()).all() && (t.T.array() < hr.hi.array()).all();
  }
  const Eigen::Vector3d overlap = (ht.hi.cwiseMin(hr.hi) - ht.lo.cwiseMax(hr.lo)).cwiseMax(0.0);
  return overlap.prod() / vol >= fraction;
}

}  // namespace

std::vector<std::string> relation_oracle(const OrientedBox3D& target, const OrientedBox3D& reference,
                                         const RelationRuleConfig& cfg,
                                         const RelationVocabulary& vocab) {
  const Eigen::Vector3d d = target.T - reference.T;
  Eigen::Vector3d m;
  for (int a = 0; a < 3; ++a) {
    m[a] = cfg.margin_fraction * 0.5 * (target.aabb_half_extent(a) + reference.aabb_half_extent(a));
  }
  struct Hit {
    std::string name;
    double strength;  // |d_a| / m_a; on/in rank above every directional
  };
  std::vector<Hit> hits;
  auto directional = [&](const char* name, int axis, bool positive) {
    const double v = d[axis];
    if (positive ? v > m[axis] : v < -m[axis]) {
      hits.push_back({name, m[axis] > 0 ? std::abs(v) / m[axis]
                                        : std::numeric_limits<double>::max()});
    }
  };
  directional("left", 0, false);
  directional("right", 0, true);
  directional("above", 1, false);
  directional("below", 1, true);
  directional("behind", 2, true);
  directional("in front of", 2, false);
  if (vocab.contains("on") && rests_on(target, reference, cfg.support_gap_m)) {
    hits.push_back({"on", std::numeric_limits<double>::infinity()});
  }
  if (vocab.contains("in") && contained_in(target, reference, cfg.containment_fraction)) {
    hits.push_back({"in", std::numeric_limits<double>::infinity()});
  }
  std::erase_if(hits, [&](const Hit& h) { return !vocab.contains(h.name); });

  if (vocab.mode() == RelationMode::Multiclass) {
    if (hits.empty()) return {};
    auto rank = [&](const Hit& h) {
      const int priority = h.name == "in" ? 2 : h.name == "on" ? 1 : 0;
      return std::make_tuple(priority, h.strength, -static_cast<long>(*vocab.index_of(h.name)));
    };
    const Hit* best = &hits.front();
    for (const auto& h : hits) {
      if (rank(h) > rank(*best)) best = &h;
    }
    return {best->name};
  }
  std::vector<std::string> out;
  for (const auto& name : vocab.names()) {
    if (std::any_of(hits.begin(), hits.end(), [&](const Hit& h) { return h.name == name; })) {
      out.push_back(name);
    }
  }
  return out;
}

std::vector<Expression> generate_expressions(const std::vector<LabeledObject>& objects,
                                             const RelationRuleConfig& cfg,
                                             const RelationVocabulary& vocab) {
  cfg.validate();
  struct Entry {
    Expression expr;
    double pair_score;
  };
  std::vector<Entry> entries;
  auto find = [&](const std::string& t, const std::string& rel, const std::string& r) -> Entry* {
    for (auto& e : entries) {
      if (e.expr.target_label == t && e.expr.relation == rel && e.expr.reference_label == r) return &e;
    }
    return nullptr;
  };
  auto add_alternative = [](Expression& e, const BBox2D& b) {
    if (e.gt_target_bbox && *e.gt_target_bbox == b) return;
    if (std::find(e.gt_target_alternatives.begin(), e.gt_target_alternatives.end(), b) ==
        e.gt_target_alternatives.end()) {
      e.gt_target_alternatives.push_back(b);
    }
  };
  for (std::size_t i = 0; i < objects.size(); ++i) {
    for (std::size_t j = 0; j < objects.size(); ++j) {
      if (i == j) continue;
      const LabeledObject& t = objects[i];
      const LabeledObject& r = objects[j];
      if (t.degenerate || r.degenerate) continue;
      if ((t.box.T - r.box.T).norm() > cfg.max_pair_distance_m) continue;
      const double score = t.score * r.score;
      for (const auto& rel : relation_oracle(t.box, r.box, cfg, vocab)) {
        if (Entry* e = find(t.label, rel, r.label)) {
          if (score > e->pair_score) {
            const BBox2D old = *e->expr.gt_target_bbox;
            e->expr.gt_target_bbox = t.bbox;
            e->expr.gt_reference_bbox = r.bbox;
            e->pair_score = score;
            std::erase(e->expr.gt_target_alternatives, t.bbox);
            add_alternative(e->expr, old);
          } else {
            add_alternative(e->expr, t.bbox);
          }
          continue;
        }
        Expression ex;
        ex.target_label = t.label;
        ex.relation = rel;
        ex.reference_label = r.label;
        ex.gt_target_bbox = t.bbox;
        ex.gt_reference_bbox = r.bbox;
        entries.push_back({std::move(ex), score});
      }
    }
  }
  std::vector<Expression> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.expr));
  return out;
}

std::vector<LabeledObject> lift_scene_objects(const SceneManifest& scene, const DepthImage& depth,
                                              const LiftConfig& cfg) {
  std::vector<LabeledObject> out;
  auto add = [&](const std::string& label, const BBox2D& bbox, const std::optional<BinaryMask>& mask,
                 double score) {
    const LiftedBox lift = lift_region(depth, bbox, mask ? &*mask : nullptr, scene.intrinsics, cfg);
    out.push_back({label, bbox, score, lift.box, lift.degenerate});
  };
  if (!scene.objects.empty()) {
    for (const auto& o : scene.objects) add(o.label, o.bbox, o.mask, 1.0);
  } else {
    for (const auto& [query, list] : scene.detections) {
      for (const auto& d : list) add(d.label, d.bbox, d.mask, d.score);
    }
  }
  return out;
}

namespace {

std::string path_from(const fs::path& target, const fs::path& base) {
  const fs::path rel = fs::absolute(target).lexically_normal().lexically_relative(
      fs::absolute(base).lexically_normal());
  return rel.empty() ? fs::absolute(target).string() : rel.generic_string();
}

}  // namespace

BuildSummary build_dataset(const std::vector<SceneManifest>& scenes, const RelationRuleConfig& cfg,
                           const fs::path& out_dir, const LiftConfig& lift, int threads) {
  cfg.validate();
  if (scenes.empty()) throw Error(ErrorKind::EmptyDataset, "build_dataset needs at least one scene");
  std::vector<std::optional<SceneManifest>> labeled(scenes.size());
  std::vector<std::string> errors(scenes.size());
  parallel_for(scenes.size(), threads, [&](std::size_t i) {
    try {
      const SceneManifest& in = scenes[i];
      const DepthImage depth = load_depth(in.resolve(in.depth_path), in.intrinsics.width,
                                          in.intrinsics.height);
      SceneManifest m = in;
      const auto objects = lift_scene_objects(in, depth, lift);
      if (objects.size() < 2) throw Error(ErrorKind::Validation, "fewer than 2 objects");
      m.expressions = generate_expressions(objects, cfg, in.vocabulary);
      for (const auto& e : m.expressions) {
        m.detections.try_emplace(e.target_label);
        m.detections.try_emplace(e.reference_label);
      }
      m.depth_path = path_from(in.resolve(in.depth_path), out_dir);
      m.rgb_path = path_from(in.resolve(in.rgb_path), out_dir);
      m.base_dir = out_dir.string();
      labeled[i] = std::move(m);
    } catch (const std::exception& e) {
      errors[i] = scenes[i].scene_id + ": " + e.what();
    }
  });

  BuildSummary summary;
  DatasetIndex index;
  index.vocabulary = scenes.front().vocabulary;
  for (const auto& name : index.vocabulary.names()) index.relation_counts[name] = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (!labeled[i]) {
      ++summary.scenes_failed;
      summary.errors.push_back(errors[i]);
      continue;
    }
    ++summary.scenes_ok;
    const std::string file = labeled[i]->scene_id + ".json";
    save_manifest(*labeled[i], out_dir / file);
    index.scenes.push_back(file);
    for (const auto& e : labeled[i]->expressions) {
      ++index.relation_counts[e.relation];
      ++index.expression_count;
    }
  }
  if (summary.scenes_ok == 0) {
    throw Error(ErrorKind::EmptyDataset, "no scene could be labelled" +
                                             (summary.errors.empty() ? "" : ": " + summary.errors.front()));
  }
  save_index(index, out_dir);
  summary.expression_count = index.expression_count;
  summary.relation_counts = index.relation_counts;
  return summary;
}

}  // namespace srg
