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
#include "srg/error.hpp"
#include "srg/features.hpp"

using namespace srg;

TEST_CASE("schema names and lengths") {
  CHECK(feature_schema_from_string("geom3d+lng") == FeatureSchema::Geom3DLng);
  CHECK(feature_schema_from_string("GEOM2D") == FeatureSchema::Geom2D);
  CHECK(feature_schema_from_string(to_string(FeatureSchema::Geom2DLng)) == FeatureSchema::Geom2DLng);
  CHECK_THROWS_AS(feature_schema_from_string("geom4d"), Error);
  CHECK(feature_length(FeatureSchema::Geom3D, 50) == 30);
  CHECK(feature_length(FeatureSchema::Geom2D, 50) == 8);
  CHECK(feature_length(FeatureSchema::Geom3DLng, 50) == 130);
  CHECK(feature_length(FeatureSchema::Geom2DLng, 50) == 108);
}

TEST_CASE("feat3d lays out T, R row-major, D for target then reference") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    OrientedBox3D t, r;
    t.T = Eigen::Vector3d::Random();
    t.R = Eigen::Matrix3d::Random();
    t.D = Eigen::Vector3d::Random();
    r.T = Eigen::Vector3d::Random();
    r.D = Eigen::Vector3d::Random();
    const FeatureVector f = feat3d(t, r);
    REQUIRE(f.values.size() == 30);
    CHECK(f.schema == FeatureSchema::Geom3D);
    CHECK(f.values[0] == t.T.x());
    CHECK(f.values[3 + 1] == t.R(0, 1));
    CHECK(f.values[3 + 3] == t.R(1, 0));
    CHECK(f.values[12] == t.D.x());
    CHECK(f.values[15] == r.T.x());
    CHECK(f.values[29] == r.D.z());
  }
}

TEST_CASE("feat2d normalizes by image size") {
  const FeatureVector f = feat2d({10, 20, 30, 40}, {0, 0, 100, 50}, 100, 50);
  const std::vector<double> want = {0.25, 0.8, 0.3, 0.8, 0.5, 0.5, 1.0, 1.0};
  REQUIRE(f.values.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(f.values[i] == doctest::Approx(want[i]));
  CHECK_THROWS_AS(feat2d({}, {}, 0, 10), Error);
}

TEST_CASE("embeddings average words and zero out unknown ones") {
  EmbeddingTable t(2);
  t.add("coffee", {1.0, 2.0});
  t.add("mug", {3.0, 0.0});
  CHECK(t.embed("mug") == std::vector<double>{3.0, 0.0});
  CHECK(t.embed("coffee mug") == std::vector<double>{2.0, 1.0});
  CHECK(t.embed("coffee_mug") == std::vector<double>{2.0, 1.0});
  CHECK(t.embed("red mug") == std::vector<double>{1.5, 0.0});
  CHECK(t.embed("zebra") == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(t.add("bad", {1.0}), Error);
}

TEST_CASE("embedding fixture loads and roundtrips") {
  const EmbeddingTable t = EmbeddingTable::load(testutil::fixture("embeddings_50d.txt"));
  CHECK(t.dimension() == 50);
  CHECK(t.contains("mug"));
  testutil::TempDir dir("emb");
  t.save(dir / "e.txt");
  const EmbeddingTable back = EmbeddingTable::load(dir / "e.txt");
  CHECK(back.embed("coffee maker") == t.embed("coffee maker"));
  CHECK_THROWS_AS(EmbeddingTable::parse("3 1\nmug 1 2\n"), Error);
}

TEST_CASE("language features append both embeddings once") {
  EmbeddingTable t(3);
  t.add("mug", {1, 2, 3});
  t.add("table", {4, 5, 6});
  const FeatureVector f = with_language(feat2d({0, 0, 1, 1}, {1, 1, 1, 1}, 10, 10), "mug", "table", t);
  CHECK(f.schema == FeatureSchema::Geom2DLng);
  REQUIRE(f.values.size() == 14);
  CHECK(f.values[8] == 1);
  CHECK(f.values[13] == 6);
  try {
    with_language(f, "mug", "table", t);
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaMismatch);
  }
}
