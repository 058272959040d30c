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

#include <doctest.h>

#include <random>

#include "../test_util.hpp"
#include "srg/dataio.hpp"
#include "srg/error.hpp"

using namespace srg;

namespace {

SceneManifest sample_manifest() {
  SceneManifest m;
  m.scene_id = "s0";
  m.rgb_path = "rgb.png";
  m.depth_path = "depth.png";
  m.intrinsics = {100.0, 100.0, 2.0, 1.5, 4, 3};
  std::vector<std::uint8_t> dense = {1, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 1};
  m.detections["mug"] = {{"mug", 0.9, {0, 0, 2, 2}, BinaryMask::encode(4, 3, dense)},
                         {"mug", 0.25, {1.5, 0.5, 1, 1}, std::nullopt}};
  m.detections["table"] = {{"table", 0.8, {0, 1, 4, 2}, std::nullopt}};
  Expression e;
  e.target_label = "mug";
  e.relation = "left";
  e.reference_label = "table";
  e.gt_target_bbox = BBox2D{0, 0, 2, 2};
  e.gt_target_alternatives = {BBox2D{1.5, 0.5, 1, 1}};
  m.expressions.push_back(e);
  SceneObject o;
  o.id = 3;
  o.label = "mug";
  o.bbox = {0, 0, 2, 2};
  OrientedBox3D b;
  b.T = {0.1, -0.2, 1.5};
  b.D = {0.3, 0.2, 0.1};
  o.box3d = b;
  m.objects.push_back(o);
  return m;
}

}  // namespace

TEST_CASE("mask rle is column-major with a leading background run") {
  // 2 x 2, foreground at (u=0, v=1) and (u=1, v=0)
  const std::vector<std::uint8_t> dense = {0, 1, 1, 0};
  const BinaryMask m = BinaryMask::encode(2, 2, dense);
  CHECK(m.runs == std::vector<std::uint32_t>{1, 2, 1});
  const auto px = decode_mask(m);
  REQUIRE(px.size() == 2);
  CHECK(px[0] == Pixel{0, 1});
  CHECK(px[1] == Pixel{1, 0});
  CHECK(m.foreground_count() == 2);

  const BinaryMask first = BinaryMask::encode(2, 1, {1, 1});
  CHECK(first.runs == std::vector<std::uint32_t>{0, 2});
}

TEST_CASE("mask rle roundtrips random grids") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 13), h = 1 + static_cast<int>(rng() % 11);
    std::vector<std::uint8_t> dense(static_cast<std::size_t>(w) * h);
    for (auto& d : dense) d = rng() % 3 == 0;
    const BinaryMask m = BinaryMask::encode(w, h, dense);
    m.validate();
    CHECK(m.dense() == dense);
    CHECK(BinaryMask::from_pixels(w, h, decode_mask(m)) == m);
  }
}

TEST_CASE("manifest serialization is byte-stable") {
  const SceneManifest m = sample_manifest();
  const std::string a = serialize_manifest(m);
  const SceneManifest back = parse_manifest(a);
  CHECK(back == m);
  CHECK(serialize_manifest(back) == a);
}

TEST_CASE("manifest validation names the offending field") {
  SceneManifest m = sample_manifest();
  m.detections["mug"][1].score = 1.5;
  try {
    parse_manifest(serialize_manifest(m));
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("detections.mug[1].score") != std::string::npos);
  }
}

TEST_CASE("malformed manifests raise parse errors") {
  CHECK_THROWS_AS(parse_manifest("{not json"), Error);
  try {
    parse_manifest("{\"scene_id\": \"x\"}");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
}

TEST_CASE("detection boxes are clamped to the image on load") {
  SceneManifest m = sample_manifest();
  m.detections["table"][0].bbox = {-1, 1, 10, 5};
  const SceneManifest back = parse_manifest(serialize_manifest(m));
  CHECK(back.detections.at("table")[0].bbox == BBox2D{0, 1, 4, 2});
}

TEST_CASE("depth png roundtrip is exact") {
  testutil::TempDir dir("depth");
  DepthImage d(7, 5);
  std::mt19937 rng(1);
  for (auto& v : d.values) v = static_cast<std::uint16_t>(rng());
  save_depth(d, dir / "d.png");
  CHECK(load_depth(dir / "d.png") == d);
  CHECK(load_depth(dir / "d.png", 7, 5) == d);
  try {
    load_depth(dir / "d.png", 8, 5);
    FAIL("expected a dimension mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
  CHECK_THROWS_AS(load_depth(dir / "missing.png"), Error);
}

TEST_CASE("dataset index roundtrip and loading") {
  testutil::TempDir dir("index");
  SceneManifest m = sample_manifest();
  save_manifest(m, dir / "s0.json");
  DatasetIndex idx;
  idx.scenes = {"s0.json"};
  idx.relation_counts = {{"left", 1}};
  idx.expression_count = 1;
  save_index(idx, dir.path());
  CHECK(load_index(dir.path()) == idx);
  const auto scenes = load_dataset(dir.path());
  REQUIRE(scenes.size() == 1);
  CHECK(scenes[0] == m);
  CHECK(scenes[0].resolve("depth.png") == (dir.path() / "depth.png").string());
}

TEST_CASE("relation phrasings map onto canonical names") {
  CHECK(canonical_relation("left of") == "left");
  CHECK(canonical_relation("To the Right of") == "right");
  CHECK(canonical_relation("in_front_of") == "in front of");
  CHECK(canonical_relation("  behind ") == "behind");
  CHECK(RelationVocabulary::avd().index_of("left of") == std::optional<std::size_t>(1));
  CHECK_THROWS_AS(RelationVocabulary({"left", "left of"}, RelationMode::Multiclass), Error);
}
