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

// Pairwise MLP inputs: target box then reference box, flattened, optionally
// followed by the two label embeddings.

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "srg/types.hpp"

namespace srg {

enum class FeatureSchema { Geom2D, Geom2DLng, Geom3D, Geom3DLng };

std::string to_string(FeatureSchema schema);
/// Accepts "GEOM3D_LNG" as well as the CLI spelling "geom3d+lng".
FeatureSchema feature_schema_from_string(const std::string& s);

bool uses_language(FeatureSchema schema);
bool is_3d(FeatureSchema schema);
FeatureSchema with_language(FeatureSchema schema);

/// Expected vector length for a schema with embedding dimension E.
std::size_t feature_length(FeatureSchema schema, std::size_t embedding_dim);

inline constexpr std::size_t kGeom2DLength = 8;
inline constexpr std::size_t kGeom3DLength = 30;

struct FeatureVector {
  std::vector<double> values;
  FeatureSchema schema = FeatureSchema::Geom3D;

  bool operator==(const FeatureVector&) const = default;
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {}

  /// Header "E N", then N lines "word v1 ... vE".
  static EmbeddingTable load(const std::filesystem::path& path);
  static EmbeddingTable parse(const std::string& text);
  void save(const std::filesystem::path& path) const;

  void add(const std::string& word, std::vector<double> vec);
  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(const std::string& word) const { return entries_.contains(word); }

  /// Mean of the per-word vectors of a label (words split on spaces and
  /// underscores); out-of-vocabulary words contribute zero vectors.
  std::vector<double> embed(const std::string& label) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> entries_;
  std::vector<std::string> order_;
};

/// [T_t, R_t row-major, D_t, T_r, R_r row-major, D_r]; 30 values.
FeatureVector feat3d(const OrientedBox3D& target, const OrientedBox3D& reference);

/// [cx, cy, w, h] of target then reference, x-terms divided by image width
/// and y-terms by image height; 8 values.
FeatureVector feat2d(const BBox2D& target, const BBox2D& reference, int image_width,
                     int image_height);

FeatureVector with_language(const FeatureVector& base, const std::string& target_label,
                            const std::string& reference_label, const EmbeddingTable& table);

}  // namespace srg
