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

// Lifting masked depth to camera-frame point clouds and fitting oriented
// boxes. Camera frame: x right, y down, z along the optical axis; meters.

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <vector>

#include "srg/types.hpp"

namespace srg {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

struct DenoiseConfig {
  int k_neighbors = 20;
  double std_ratio = 2.0;
  int min_depth_mm = 300;
  int max_depth_mm = 10000;

  void validate() const;
};

/// Foreground pixels with valid depth, lifted through the pinhole model.
/// Throws EmptyCloud when nothing survives and DimensionMismatch when the
/// mask and depth grids differ.
PointCloud backproject(const DepthImage& depth, const BinaryMask& mask,
                       const CameraIntrinsics& intrinsics);

/// Every pixel whose center lies inside the box (used when a detection has
/// no mask).
PointCloud backproject(const DepthImage& depth, const BBox2D& region,
                       const CameraIntrinsics& intrinsics);

Eigen::Vector3d backproject_pixel(double u, double v, double depth_m,
                                  const CameraIntrinsics& intrinsics);
Eigen::Vector2d project(const Eigen::Vector3d& point, const CameraIntrinsics& intrinsics);

/// Depth-range filter followed by statistical outlier removal on the mean
/// distance to the k nearest neighbours. The result keeps input order.
PointCloud denoise(const PointCloud& cloud, const DenoiseConfig& cfg);

/// Mean distance from each point to its k nearest neighbours (self excluded;
/// k is capped at n-1). Uses a kd-tree.
std::vector<double> mean_knn_distances(const PointCloud& cloud, int k);

/// R columns = principal axes ordered by descending extent,
/// sign-fixed so the largest-magnitude component of the first two columns is
/// positive, third = first x second. D = max - min of projections and T the
/// center of that range, so every input point lies inside the box.
///
/// Tied eigenvalues leave the axes undetermined by the covariance alone. Inside
/// a tied subspace the axes are taken as minimisers of the fourth central
/// moment (which recovers the faces of a cube), and when that is flat too
/// (spheres, cylinders' round section) as the camera axes x, y, z in order.
/// Throws DegenerateCloud for fewer than 4 points or a zero covariance.
OrientedBox3D pca_fit_box(const PointCloud& cloud);

double iou_2d(const BBox2D& a, const BBox2D& b);

struct LiftConfig {
  DenoiseConfig denoise;
  double fallback_extent_m = 0.01;
};

struct LiftedBox {
  OrientedBox3D box;
  bool degenerate = false;
  std::size_t n_points = 0;
};

/// backproject -> denoise -> pca_fit_box. Any failure produces the
/// axis-aligned fallback box on the bbox-center ray at the median valid
/// depth of the region, flagged degenerate.
LiftedBox lift_region(const DepthImage& depth, const BBox2D& bbox, const BinaryMask* mask,
                      const CameraIntrinsics& intrinsics, const LiftConfig& cfg = {});

/// The cloud lift_region fits (after denoising); empty on failure.
PointCloud lift_cloud(const DepthImage& depth, const BBox2D& bbox, const BinaryMask* mask,
                      const CameraIntrinsics& intrinsics, const DenoiseConfig& cfg);

/// ASCII "x y z" per line, meters.
void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace srg
