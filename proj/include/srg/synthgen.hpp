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

// Deterministic synthetic RGB-D scenes: axis-aligned boxes in a room, depth
// rendered by ray casting from an upright camera at the origin.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srg/autolabel.hpp"
#include "srg/types.hpp"

namespace srg {

struct WorldBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();

  Eigen::Vector3d center() const { return 0.5 * (min + max); }
  Eigen::Vector3d size() const { return max - min; }
  bool intersects(const WorldBox& o, double gap = 0.0) const;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int min_objects = 4;
  int max_objects = 10;
  /// Room interior; the camera sits at the origin looking along +z.
  WorldBox room{{-3.0, -2.0, -0.5}, {3.0, 1.2, 6.0}};
  /// Object centers are drawn from this region (and must stay in view).
  WorldBox placement{{-1.4, -1.0, 1.2}, {1.4, 1.0, 4.0}};
  std::array<double, 2> object_size_range_m{0.1, 0.5};
  CameraIntrinsics camera{120.0, 120.0, 80.0, 60.0, 160, 120};
  std::vector<std::string> labels{"mug", "book", "lamp", "chair", "box", "bottle", "plant", "laptop"};
  /// Objects with fewer visible pixels are removed (stands in for an
  /// occlusion rate: heavy occlusion shows up as dropped objects).
  int min_visible_pixels = 30;
  /// 0 = perfect detections (true boxes, score 1). Above 0: boxes jittered
  /// by +-5% of their extent, scores ~ U(0.5, 1), each object missed with
  /// probability 0.15 * noise, and up to round(3 * noise) distractors per
  /// label with scores ~ U(0, 0.6).
  double detector_noise = 0.0;
  RelationVocabulary vocabulary = RelationVocabulary::avd();
  RelationRuleConfig rules;

  void validate() const;
};

struct Render {
  int width = 0;
  int height = 0;
  std::vector<double> depth_m;  // z-depth of the nearest hit, row-major
  std::vector<int> object_id;   // index into the box list, -1 = room
};

/// Casts the ray through integer pixel (u, v) (direction ((u-cx)/fx, (v-cy)/fy, 1))
/// against every box and the room interior.
Render render_scene(const std::vector<WorldBox>& boxes, const WorldBox& room,
                    const CameraIntrinsics& camera);

/// Entry distance t of the ray o + t*d into the box, or a negative value on
/// a miss. With d.z = 1, t is the z-depth.
double ray_box_entry(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, const WorldBox& box);

struct GeneratedScene {
  SceneManifest manifest;
  DepthImage depth;
  std::vector<WorldBox> boxes;        // parallel to manifest.objects
  std::vector<OrientedBox3D> truth;   // parallel to manifest.objects
};

/// Throws PlacementFailure after 10,000 rejected placements.
GeneratedScene generate_scene(const SceneSpec& spec, const std::string& scene_id = "scene");

/// Writes <dir>/<scene_id>.json, <scene_id>_depth.png and <scene_id>_rgb.png.
void write_scene(const GeneratedScene& scene, const std::filesystem::path& dir);

struct BenchmarkSummary {
  std::map<std::string, std::vector<std::string>> splits;  // "train"/"val"/"test" -> scene ids
  std::map<std::string, std::size_t> relation_counts;
  std::size_t expression_count = 0;
};

/// n_scenes >= 10, split 80/10/10 by scene into out_dir/{train,val,test},
/// each with its own index.json. Scene i is seeded from (seed, i).
BenchmarkSummary generate_benchmark(std::size_t n_scenes, const SceneSpec& base,
                                    const std::filesystem::path& out_dir, int threads = 1);

/// Seed of scene `index` under master seed `seed`.
std::uint64_t scene_seed(std::uint64_t seed, std::size_t index);

}  // namespace srg
