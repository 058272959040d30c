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

// On-disk formats: scene manifests (JSON), dataset indices, 16-bit depth PNGs.
//
// Manifest layout:
//   {
//     "scene_id": "...", "rgb_path": "...", "depth_path": "...",
//     "intrinsics": {"fx","fy","cx","cy","width","height"},
//     "vocabulary": {"names": [...], "mode": "multiclass"|"multilabel"},   optional
//     "detections": {"<query label>": [{"label","score","bbox":[x,y,w,h],
//                                        "mask":{"size":[h,w],"runs":[...]}}]},
//     "expressions": [{"target","relation","reference",
//                      "gt_target_bbox"?, "gt_reference_bbox"?, "gt_target_alternatives"?}],
//     "objects": [{"id","label","bbox","mask"?, "box3d"?: {"T":[3],"R":[9 row-major],"D":[3]}}]
//   }
// Paths are relative to the manifest's directory. A missing vocabulary means
// the six-relation multilabel set.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srg/types.hpp"

namespace srg {

SceneManifest parse_manifest(const std::string& text, const std::string& base_dir = ".");
std::string serialize_manifest(const SceneManifest& manifest);

SceneManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const SceneManifest& manifest, const std::filesystem::path& path);

/// Reads a 16-bit single-channel PNG; throws DimensionMismatch if the image
/// is not width x height.
DepthImage load_depth(const std::filesystem::path& path, int width, int height);
DepthImage load_depth(const std::filesystem::path& path);
void save_depth(const DepthImage& depth, const std::filesystem::path& path);

/// Constant-valued 8-bit grayscale PNG (stand-in RGB frame for synthetic scenes).
void save_placeholder_image(int width, int height, std::uint8_t value,
                            const std::filesystem::path& path);

/// A dataset directory holds index.json listing manifest files relative to it.
struct DatasetIndex {
  std::vector<std::string> scenes;
  RelationVocabulary vocabulary = RelationVocabulary::avd();
  std::map<std::string, std::size_t> relation_counts;
  std::size_t expression_count = 0;

  bool operator==(const DatasetIndex&) const = default;
};

DatasetIndex load_index(const std::filesystem::path& dataset_dir);
void save_index(const DatasetIndex& index, const std::filesystem::path& dataset_dir);

/// Loads every manifest listed in the index, in index order.
std::vector<SceneManifest> load_dataset(const std::filesystem::path& dataset_dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace srg
