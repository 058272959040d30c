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

#include "srg/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "srg/dataio.hpp"
#include "srg/error.hpp"
#include "srg/parallel.hpp"

namespace srg {

namespace fs = std::filesystem;

namespace {

constexpr int kMaxPlacementAttempts = 10000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Small portable generator so scenes do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() { return state_ = splitmix64(state_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

bool in_view(const WorldBox& b, const CameraIntrinsics& k) {
  for (int c = 0; c < 8; ++c) {
    const Eigen::Vector3d p((c & 1) ? b.max.x() : b.min.x(), (c & 2) ? b.max.y() : b.min.y(),
                            (c & 4) ? b.max.z() : b.min.z());
    if (p.z() <= 0.1) return false;
    const double u = k.fx * p.x() / p.z() + k.cx;
    const double v = k.fy * p.y() / p.z() + k.cy;
    if (u < 0 || u > k.width - 1 || v < 0 || v > k.height - 1) return false;
  }
  return true;
}

bool inside(const WorldBox& inner, const WorldBox& outer) {
  return (inner.min.array() >= outer.min.array()).all() && (inner.max.array() <= outer.max.array()).all();
}

double ray_box_exit(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const WorldBox& box) {
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) continue;
    const double t1 = (box.min[a] - o[a]) / d[a];
    const double t2 = (box.max[a] - o[a]) / d[a];
    t_exit = std::min(t_exit, std::max(t1, t2));
  }
  return t_exit;
}

BBox2D tight_bbox(const std::vector<std::uint8_t>& dense, int w, int h) {
  int u0 = w, v0 = h, u1 = -1, v1 = -1;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!dense[static_cast<std::size_t>(v) * w + u]) continue;
      u0 = std::min(u0, u);
      v0 = std::min(v0, v);
      u1 = std::max(u1, u);
      v1 = std::max(v1, v);
    }
  }
  return {static_cast<double>(u0), static_cast<double>(v0), static_cast<double>(u1 - u0 + 1),
          static_cast<double>(v1 - v0 + 1)};
}

}  // namespace

bool WorldBox::intersects(const WorldBox& o, double gap) const {
  for (int a = 0; a < 3; ++a) {
    if (max[a] + gap <= o.min[a] || o.max[a] + gap <= min[a]) return false;
  }
  return true;
}

void SceneSpec::validate() const {
  if (min_objects < 2 || max_objects < min_objects) {
    throw Error(ErrorKind::Validation, "spec.n_objects must satisfy 2 <= min <= max");
  }
  if (!(object_size_range_m[0] > 0 && object_size_range_m[1] >= object_size_range_m[0])) {
    throw Error(ErrorKind::Validation, "spec.object_size_range_m must satisfy 0 < min <= max");
  }
  if (!((room.max - room.min).array() > 0).all()) throw Error(ErrorKind::Validation, "spec.room is empty");
  if (!inside(placement, room)) throw Error(ErrorKind::Validation, "spec.placement must lie inside the room");
  if (!((room.min.array() < 0).all() && (room.max.array() > 0).all())) {
    throw Error(ErrorKind::Validation, "spec.room must contain the camera at the origin");
  }
  if (!(room.max.z() > 0 && room.center().z() > 0)) {
    throw Error(ErrorKind::Validation, "spec.room center must lie in front of the camera");
  }
  if (labels.empty()) throw Error(ErrorKind::Validation, "spec.labels is empty");
  if (!(detector_noise >= 0 && detector_noise <= 1)) {
    throw Error(ErrorKind::Validation, "spec.detector_noise must lie in [0,1]");
  }
  if (min_visible_pixels < 1) throw Error(ErrorKind::Validation, "spec.min_visible_pixels must be >= 1");
  camera.validate();
  rules.validate();
}

double ray_box_entry(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const WorldBox& box) {
  double t_enter = -std::numeric_limits<double>::infinity();
  double t_exit = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < box.min[a] || o[a] > box.max[a]) return -1.0;
      continue;
    }
    const double t1 = (box.min[a] - o[a]) / d[a];
    const double t2 = (box.max[a] - o[a]) / d[a];
    t_enter = std::max(t_enter, std::min(t1, t2));
    t_exit = std::min(t_exit, std::max(t1, t2));
  }
  if (t_enter > t_exit || t_enter <= 0.0) return -1.0;
  return t_enter;
}

Render render_scene(const std::vector<WorldBox>& boxes, const WorldBox& room,
                    const CameraIntrinsics& k) {
  Render r;
  r.width = k.width;
  r.height = k.height;
  const std::size_t n = static_cast<std::size_t>(k.width) * k.height;
  r.depth_m.assign(n, 0.0);
  r.object_id.assign(n, -1);
  const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Eigen::Vector3d dir((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      double best = ray_box_exit(origin, dir, room);
      int id = -1;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        const double t = ray_box_entry(origin, dir, boxes[i]);
        if (t > 0.0 && t < best) {
          best = t;
          id = static_cast<int>(i);
        }
      }
      const std::size_t idx = static_cast<std::size_t>(v) * k.width + u;
      r.depth_m[idx] = best;
      r.object_id[idx] = id;
    }
  }
  return r;
}

std::uint64_t scene_seed(std::uint64_t seed, std::size_t index) {
  return splitmix64(splitmix64(seed) ^ (0xd1b54a32d192ed03ULL * (index + 1)));
}

GeneratedScene generate_scene(const SceneSpec& spec, const std::string& scene_id) {
  spec.validate();
  Rng rng(spec.seed);
  const CameraIntrinsics& cam = spec.camera;

  std::vector<WorldBox> boxes;
  std::vector<std::string> labels;
  Render render;
  int attempts = 0;
  for (;;) {
    boxes.clear();
    labels.clear();
    const int n = rng.uniform_int(spec.min_objects, spec.max_objects);
    while (static_cast<int>(boxes.size()) < n) {
      if (++attempts > kMaxPlacementAttempts) {
        throw Error(ErrorKind::PlacementFailure,
                    "could not place " + std::to_string(n) + " objects in " +
                        std::to_string(kMaxPlacementAttempts) + " attempts");
      }
      Eigen::Vector3d size, center;
      for (int a = 0; a < 3; ++a) size[a] = rng.uniform(spec.object_size_range_m[0], spec.object_size_range_m[1]);
      for (int a = 0; a < 3; ++a) center[a] = rng.uniform(spec.placement.min[a], spec.placement.max[a]);
      const std::string& label = spec.labels[rng.next() % spec.labels.size()];
      const WorldBox b{center - 0.5 * size, center + 0.5 * size};
      if (!inside(b, spec.room) || !in_view(b, cam)) continue;
      if (std::any_of(boxes.begin(), boxes.end(), [&](const WorldBox& o) { return o.intersects(b, 0.05); })) {
        continue;
      }
      boxes.push_back(b);
      labels.push_back(label);
    }
    // Drop barely visible objects until the visible set is stable.
    for (;;) {
      render = render_scene(boxes, spec.room, cam);
      std::vector<int> counts(boxes.size(), 0);
      for (int id : render.object_id) {
        if (id >= 0) ++counts[static_cast<std::size_t>(id)];
      }
      std::vector<WorldBox> kept_boxes;
      std::vector<std::string> kept_labels;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (counts[i] >= spec.min_visible_pixels) {
          kept_boxes.push_back(boxes[i]);
          kept_labels.push_back(labels[i]);
        }
      }
      if (kept_boxes.size() == boxes.size()) break;
      boxes = std::move(kept_boxes);
      labels = std::move(kept_labels);
    }
    if (boxes.size() >= 2) break;
  }

  GeneratedScene out;
  out.boxes = boxes;
  SceneManifest& m = out.manifest;
  m.scene_id = scene_id;
  m.rgb_path = scene_id + "_rgb.png";
  m.depth_path = scene_id + "_depth.png";
  m.intrinsics = cam;
  m.vocabulary = spec.vocabulary;

  out.depth = DepthImage(cam.width, cam.height);
  for (std::size_t i = 0; i < render.depth_m.size(); ++i) {
    const double mm = std::round(render.depth_m[i] * 1000.0);
    out.depth.values[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }

  for (std::size_t i = 0; i < boxes.size(); ++i) {
    std::vector<std::uint8_t> dense(render.object_id.size(), 0);
    for (std::size_t p = 0; p < dense.size(); ++p) dense[p] = render.object_id[p] == static_cast<int>(i);
    SceneObject o;
    o.id = static_cast<int>(i);
    o.label = labels[i];
    o.bbox = tight_bbox(dense, cam.width, cam.height);
    o.mask = BinaryMask::encode(cam.width, cam.height, dense);
    OrientedBox3D truth;
    truth.T = boxes[i].center();
    truth.D = boxes[i].size();
    o.box3d = truth;
    out.truth.push_back(truth);
    m.objects.push_back(std::move(o));
  }

  // Detections use their own stream so the noise level never moves the geometry.
  Rng noise(spec.seed ^ 0x6a09e667f3bcc909ULL);
  const double nz = spec.detector_noise;
  for (const auto& obj : m.objects) m.detections.try_emplace(obj.label);
  for (auto& [label, list] : m.detections) {
    for (const auto& obj : m.objects) {
      if (obj.label != label) continue;
      if (nz == 0.0) {
        list.push_back({label, 1.0, obj.bbox, obj.mask});
        continue;
      }
      const bool missed = noise.uniform() < 0.15 * nz;
      BBox2D b = obj.bbox;
      const double jx = noise.uniform(-0.05, 0.05), jy = noise.uniform(-0.05, 0.05);
      const double jw = noise.uniform(-0.05, 0.05), jh = noise.uniform(-0.05, 0.05);
      b.x += jx * obj.bbox.w;
      b.y += jy * obj.bbox.h;
      b.w *= 1.0 + jw;
      b.h *= 1.0 + jh;
      const double score = noise.uniform(0.5, 1.0);
      if (!missed) list.push_back({label, score, b.clamped(cam.width, cam.height), obj.mask});
    }
    if (nz == 0.0) continue;
    const int distractors = noise.uniform_int(0, static_cast<int>(std::lround(3.0 * nz)));
    for (int d = 0; d < distractors; ++d) {
      const double score = noise.uniform(0.0, 0.6);
      std::vector<const SceneObject*> others;
      for (const auto& obj : m.objects) {
        if (obj.label != label) others.push_back(&obj);
      }
      if (!others.empty() && noise.uniform() < 0.5) {
        const SceneObject& o = *others[noise.next() % others.size()];
        list.push_back({label, score, o.bbox, o.mask});
      } else {
        const double w = noise.uniform(8.0, 40.0), h = noise.uniform(8.0, 40.0);
        const BBox2D b{noise.uniform(0.0, cam.width - w), noise.uniform(0.0, cam.height - h), w, h};
        list.push_back({label, score, b, std::nullopt});
      }
    }
  }

  const auto lifted = lift_scene_objects(m, out.depth);
  m.expressions = generate_expressions(lifted, spec.rules, spec.vocabulary);
  return out;
}

void write_scene(const GeneratedScene& scene, const fs::path& dir) {
  const SceneManifest& m = scene.manifest;
  fs::create_directories(dir);
  save_depth(scene.depth, dir / m.depth_path);
  save_placeholder_image(m.intrinsics.width, m.intrinsics.height, 128, dir / m.rgb_path);
  save_manifest(m, dir / (m.scene_id + ".json"));
}

BenchmarkSummary generate_benchmark(std::size_t n_scenes, const SceneSpec& base, const fs::path& out_dir,
                                    int threads) {
  if (n_scenes < 10) throw Error(ErrorKind::Validation, "benchmark needs at least 10 scenes");
  base.validate();
  std::vector<GeneratedScene> scenes(n_scenes);
  parallel_for(n_scenes, threads, [&](std::size_t i) {
    SceneSpec spec = base;
    spec.seed = scene_seed(base.seed, i);
    char id[32];
    std::snprintf(id, sizeof id, "scene_%05zu", i);
    scenes[i] = generate_scene(spec, id);
  });

  const std::size_t n_train = n_scenes * 8 / 10;
  const std::size_t n_val = n_scenes / 10;
  BenchmarkSummary summary;
  for (const auto& name : base.vocabulary.names()) summary.relation_counts[name] = 0;
  struct Split {
    const char* name;
    std::size_t lo, hi;
  };
  const Split splits[] = {{"train", 0, n_train},
                          {"val", n_train, n_train + n_val},
                          {"test", n_train + n_val, n_scenes}};
  for (const auto& [split, lo, hi] : splits) {
    const fs::path dir = out_dir / split;
    DatasetIndex index;
    index.vocabulary = base.vocabulary;
    for (const auto& name : base.vocabulary.names()) index.relation_counts[name] = 0;
    auto& ids = summary.splits[split];
    for (std::size_t i = lo; i < hi; ++i) {
      write_scene(scenes[i], dir);
      const SceneManifest& m = scenes[i].manifest;
      ids.push_back(m.scene_id);
      index.scenes.push_back(m.scene_id + ".json");
      for (const auto& e : m.expressions) {
        ++index.relation_counts[e.relation];
        ++index.expression_count;
        ++summary.relation_counts[e.relation];
        ++summary.expression_count;
      }
    }
    save_index(index, dir);
  }
  return summary;
}

}  // namespace srg
