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

// Value types shared across the grounding pipeline.

#include <Eigen/Core>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace srg {

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ValidationError naming the first violated field.
  void validate() const;

  bool operator==(const CameraIntrinsics&) const = default;
};

/// Row-major 16-bit depth in millimeters; 0 marks an invalid pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> values;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0) {}

  std::uint16_t at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  std::uint16_t& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }

  bool operator==(const DepthImage&) const = default;
};

struct Pixel {
  int u = 0;  // column
  int v = 0;  // row

  auto operator<=>(const Pixel&) const = default;
};

/// Column-major run-length mask. runs[0] counts background pixels (possibly
/// zero), then runs alternate foreground/background.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> runs;

  /// dense is row-major, nonzero = foreground.
  static BinaryMask encode(int width, int height, const std::vector<std::uint8_t>& dense);
  static BinaryMask from_pixels(int width, int height, const std::vector<Pixel>& pixels);

  /// Row-major 0/1 grid.
  std::vector<std::uint8_t> dense() const;
  std::size_t foreground_count() const;
  void validate() const;

  bool operator==(const BinaryMask&) const = default;
};

/// Foreground pixels, ordered column-major (the run order).
std::vector<Pixel> decode_mask(const BinaryMask& mask);

struct BBox2D {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  BBox2D clamped(int width, int height) const;

  auto operator<=>(const BBox2D&) const = default;
};

struct Detection2D {
  std::string label;
  double score = 0.0;
  BBox2D bbox;
  std::optional<BinaryMask> mask;

  bool operator==(const Detection2D&) const = default;
};

enum class RelationMode { Multiclass, Multilabel };

class RelationVocabulary {
 public:
  RelationVocabulary() = default;
  RelationVocabulary(std::vector<std::string> names, RelationMode mode);

  /// right, left, above, below, behind, in front of (multilabel).
  static RelationVocabulary avd();
  /// on, in, left, right, behind, in front of (multiclass).
  static RelationVocabulary semantic_abstraction();

  const std::vector<std::string>& names() const { return names_; }
  RelationMode mode() const { return mode_; }
  std::size_t size() const { return names_.size(); }
  std::optional<std::size_t> index_of(const std::string& relation) const;
  bool contains(const std::string& relation) const { return index_of(relation).has_value(); }

  bool operator==(const RelationVocabulary&) const = default;

 private:
  std::vector<std::string> names_;
  RelationMode mode_ = RelationMode::Multilabel;
};

/// Maps phrasings such as "left of", "to the left of", "in_front_of" onto the
/// canonical relation names. Unknown phrases come back trimmed and lowercased.
std::string canonical_relation(const std::string& phrase);

std::string to_string(RelationMode mode);
RelationMode relation_mode_from_string(const std::string& s);

struct Expression {
  std::string target_label;
  std::string relation;
  std::string reference_label;
  std::optional<BBox2D> gt_target_bbox;
  std::optional<BBox2D> gt_reference_bbox;
  /// Further target instances that satisfy the same triplet.
  std::vector<BBox2D> gt_target_alternatives;

  bool operator==(const Expression&) const = default;
};

/// PCA-fitted object frame: translation, rotation (columns are the object
/// axes in camera coordinates) and extents along those axes, in meters.
struct OrientedBox3D {
  Eigen::Vector3d T = Eigen::Vector3d::Zero();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d D = Eigen::Vector3d::Zero();

  /// Half-extent of the box's axis-aligned hull along camera axis a.
  double aabb_half_extent(int axis) const;

  bool operator==(const OrientedBox3D& o) const { return T == o.T && R == o.R && D == o.D; }
};

/// A ground-truth instance carried by synthetic or annotated scenes.
struct SceneObject {
  int id = 0;
  std::string label;
  BBox2D bbox;
  std::optional<BinaryMask> mask;
  std::optional<OrientedBox3D> box3d;

  bool operator==(const SceneObject&) const = default;
};

struct SceneManifest {
  std::string scene_id;
  std::string rgb_path;
  std::string depth_path;
  CameraIntrinsics intrinsics;
  RelationVocabulary vocabulary = RelationVocabulary::avd();
  std::map<std::string, std::vector<Detection2D>> detections;
  std::vector<Expression> expressions;
  std::vector<SceneObject> objects;

  /// Directory the manifest was loaded from; relative paths resolve here.
  /// Not serialized.
  std::string base_dir;

  std::string resolve(const std::string& path) const;
  void validate() const;

  bool operator==(const SceneManifest& o) const {
    return scene_id == o.scene_id && rgb_path == o.rgb_path && depth_path == o.depth_path &&
           intrinsics == o.intrinsics && vocabulary == o.vocabulary &&
           detections == o.detections && expressions == o.expressions && objects == o.objects;
  }
};

}  // namespace srg
