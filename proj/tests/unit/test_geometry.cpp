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

#include <Eigen/Geometry>

#include <cmath>
#include <random>

#include "../oracles/oracles.hpp"
#include "srg/error.hpp"
#include "srg/geometry.hpp"

using namespace srg;

namespace {

const CameraIntrinsics kCam{500.0, 480.0, 31.5, 23.5, 64, 48};

PointCloud box_cloud(const Eigen::Vector3d& dims, const Eigen::Matrix3d& R, const Eigen::Vector3d& T,
                     int per_axis, bool surface_only = false) {
  PointCloud c;
  for (int i = 0; i < per_axis; ++i) {
    for (int j = 0; j < per_axis; ++j) {
      for (int k = 0; k < per_axis; ++k) {
        const bool on_face = i == 0 || j == 0 || k == 0 || i == per_axis - 1 || j == per_axis - 1 ||
                             k == per_axis - 1;
        if (surface_only && !on_face) continue;
        const Eigen::Vector3d s(i / (per_axis - 1.0) - 0.5, j / (per_axis - 1.0) - 0.5,
                                k / (per_axis - 1.0) - 0.5);
        c.points.push_back(T + R * s.cwiseProduct(dims));
      }
    }
  }
  return c;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

}  // namespace

TEST_CASE("backprojection follows the pinhole model") {
  const Eigen::Vector3d p = backproject_pixel(41.5, 3.5, 2.0, kCam);
  CHECK(p.x() == doctest::Approx(10.0 * 2.0 / 500.0));
  CHECK(p.y() == doctest::Approx(-20.0 * 2.0 / 480.0));
  CHECK(p.z() == 2.0);
  const Eigen::Vector2d uv = project(p, kCam);
  CHECK(uv.x() == doctest::Approx(41.5));
  CHECK(uv.y() == doctest::Approx(3.5));
  const Eigen::Vector2d o = oracle::project(p, kCam);
  CHECK(o.isApprox(uv));
}

TEST_CASE("backproject uses masked pixels with valid depth, in millimeters") {
  DepthImage d(kCam.width, kCam.height);
  d.at(3, 4) = 1500;
  d.at(5, 4) = 0;  // invalid
  const BinaryMask mask = BinaryMask::from_pixels(kCam.width, kCam.height, {{3, 4}, {5, 4}});
  const PointCloud c = backproject(d, mask, kCam);
  REQUIRE(c.size() == 1);
  CHECK(c.points[0].isApprox(backproject_pixel(3, 4, 1.5, kCam)));

  const BinaryMask empty = BinaryMask::from_pixels(kCam.width, kCam.height, {{5, 4}});
  try {
    backproject(d, empty, kCam);
    FAIL("expected EmptyCloud");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyCloud);
  }
  const BinaryMask wrong = BinaryMask::from_pixels(10, 10, {{3, 4}});
  try {
    backproject(d, wrong, kCam);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("box backprojection covers pixels whose centers fall inside") {
  DepthImage d(kCam.width, kCam.height);
  for (auto& v : d.values) v = 1000;
  CHECK(backproject(d, BBox2D{2, 3, 4, 2}, kCam).size() == 8);
  CHECK(backproject(d, BBox2D{2.6, 3, 1, 1}, kCam).size() == 1);
}

TEST_CASE("knn distances match brute force") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int n : {2, 3, 17, 200}) {
    PointCloud c;
    for (int i = 0; i < n; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
    for (int k : {1, 5, 20}) {
      const auto got = mean_knn_distances(c, k);
      const auto want = oracle::mean_knn(c.points, k);
      for (int i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("denoise removes far outliers and keeps clean cubes") {
  const PointCloud cube = box_cloud({0.2, 0.2, 0.2}, Eigen::Matrix3d::Identity(), {0, 0, 1.5}, 10);
  DenoiseConfig cfg;
  const PointCloud clean = denoise(cube, cfg);
  CHECK(clean.size() >= static_cast<std::size_t>(0.8 * cube.size()));
  // kept iff mean k-NN distance <= mean + ratio * population std
  const auto dist = oracle::mean_knn(cube.points, cfg.k_neighbors);
  double mean = 0, var = 0;
  for (double d : dist) mean += d;
  mean /= dist.size();
  for (double d : dist) var += (d - mean) * (d - mean);
  const double cut = mean + cfg.std_ratio * std::sqrt(var / dist.size());
  std::vector<Eigen::Vector3d> want;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= cut) want.push_back(cube.points[i]);
  }
  CHECK(clean.points == want);

  PointCloud noisy = cube;
  noisy.points.emplace_back(3.0, 3.0, 4.0);
  noisy.points.emplace_back(-2.0, 1.0, 2.5);
  noisy.points.emplace_back(0.0, 0.0, 20.0);  // beyond max depth
  const PointCloud out = denoise(noisy, cfg);
  for (const auto& p : out.points) CHECK((p - Eigen::Vector3d(0, 0, 1.5)).norm() < 0.5);
}

TEST_CASE("denoise filters by depth range first") {
  PointCloud c;
  c.points = {{0, 0, 0.1}, {0, 0, 1.0}};
  const PointCloud out = denoise(c, DenoiseConfig{});
  REQUIRE(out.size() == 1);
  CHECK(out.points[0].z() == 1.0);
  DenoiseConfig bad;
  bad.k_neighbors = 0;
  CHECK_THROWS_AS(denoise(c, bad), Error);
}

TEST_CASE("pca recovers an elongated box") {
  std::mt19937_64 rng(9);
  const Eigen::Matrix3d R = random_rotation(rng);
  const PointCloud c = box_cloud({1.0, 0.2, 0.1}, R, {0.3, -0.1, 2.0}, 21);
  const OrientedBox3D b = pca_fit_box(c);
  CHECK(b.D[0] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(b.D[1] == doctest::Approx(0.2).epsilon(0.05));
  CHECK(b.D[2] == doctest::Approx(0.1).epsilon(0.05));
  CHECK(b.D[0] >= b.D[1]);
  CHECK(b.D[1] >= b.D[2]);
  CHECK(std::abs(b.R.col(0).dot(R.col(0))) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("pca boxes are proper rotations containing every point") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 30; ++trial) {
    PointCloud c;
    const Eigen::Matrix3d A = Eigen::Matrix3d::Random();
    for (int i = 0; i < 60; ++i) c.points.push_back(A * Eigen::Vector3d(u(rng), u(rng), u(rng)));
    const OrientedBox3D b = pca_fit_box(c);
    CHECK((b.R.transpose() * b.R - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(b.R.determinant() == doctest::Approx(1.0));
    CHECK(b.D[0] >= b.D[1] - 1e-9);
    CHECK(b.D[1] >= b.D[2] - 1e-9);
    for (const auto& p : c.points) {
      const Eigen::Vector3d local = b.R.transpose() * (p - b.T);
      for (int a = 0; a < 3; ++a) CHECK(std::abs(local[a]) <= 0.5 * b.D[a] + 1e-9);
    }
  }
}

TEST_CASE("pca on an axis-aligned cube picks the camera axes") {
  const PointCloud c = box_cloud({0.5, 0.5, 0.5}, Eigen::Matrix3d::Identity(), {0, 0, 2}, 6);
  const OrientedBox3D b = pca_fit_box(c);
  CHECK((b.R - Eigen::Matrix3d::Identity()).norm() < 1e-6);
  CHECK((b.D - Eigen::Vector3d::Constant(0.5)).norm() < 1e-9);
  CHECK((b.T - Eigen::Vector3d(0, 0, 2)).norm() < 1e-12);
}

TEST_CASE("pca rejects degenerate clouds") {
  PointCloud c;
  c.points = {{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}};
  try {
    pca_fit_box(c);
    FAIL("expected DegenerateCloud");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateCloud);
  }
  c.points.resize(3);
  CHECK_THROWS_AS(pca_fit_box(c), Error);
}

TEST_CASE("iou") {
  CHECK(iou_2d({0, 0, 2, 2}, {0, 0, 2, 2}) == 1.0);
  CHECK(iou_2d({0, 0, 2, 2}, {1, 0, 2, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK(iou_2d({0, 0, 1, 1}, {5, 5, 1, 1}) == 0.0);
  CHECK(iou_2d({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
}

TEST_CASE("lift falls back to a flagged box on the center ray") {
  DepthImage d(kCam.width, kCam.height);
  d.at(10, 10) = 2000;
  d.at(11, 10) = 2000;
  const LiftedBox lb = lift_region(d, BBox2D{10, 10, 2, 1}, nullptr, kCam);
  CHECK(lb.degenerate);
  CHECK(lb.box.T.z() == doctest::Approx(2.0));
  CHECK(lb.box.D[0] == doctest::Approx(0.01));
  const Eigen::Vector2d uv = project(lb.box.T, kCam);
  CHECK(uv.x() == doctest::Approx(10.5));
  CHECK(uv.y() == doctest::Approx(10.0));

  const LiftedBox none = lift_region(d, BBox2D{40, 40, 3, 3}, nullptr, kCam);
  CHECK(none.degenerate);
  CHECK(none.box.T.z() == doctest::Approx(1.0));
}
