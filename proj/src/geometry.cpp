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

#include "srg/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <queue>

#include "srg/error.hpp"
#include "srg/kernels.hpp"

namespace srg {

void DenoiseConfig::validate() const {
  if (k_neighbors < 1) throw Error(ErrorKind::Validation, "denoise.k_neighbors must be >= 1");
  if (!(std_ratio > 0)) throw Error(ErrorKind::Validation, "denoise.std_ratio must be > 0");
  if (min_depth_mm < 0 || min_depth_mm >= max_depth_mm) {
    throw Error(ErrorKind::Validation, "denoise depth range must satisfy 0 <= min < max");
  }
}

// ---------------------------------------------------------------------------
// Backprojection

Eigen::Vector3d backproject_pixel(double u, double v, double depth_m, const CameraIntrinsics& k) {
  return {(u - k.cx) * depth_m / k.fx, (v - k.cy) * depth_m / k.fy, depth_m};
}

Eigen::Vector2d project(const Eigen::Vector3d& p, const CameraIntrinsics& k) {
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

namespace {

void check_grid(const DepthImage& depth, const CameraIntrinsics& k) {
  k.validate();
  if (depth.width != k.width || depth.height != k.height ||
      depth.values.size() != static_cast<std::size_t>(depth.width) * depth.height) {
    throw Error(ErrorKind::DimensionMismatch, "depth image does not match the intrinsics");
  }
}

}  // namespace

PointCloud backproject(const DepthImage& depth, const BinaryMask& mask, const CameraIntrinsics& k) {
  check_grid(depth, k);
  if (mask.width != depth.width || mask.height != depth.height) {
    throw Error(ErrorKind::DimensionMismatch, "mask does not match the depth image");
  }
  PointCloud cloud;
  for (const Pixel& p : decode_mask(mask)) {
    const std::uint16_t d = depth.at(p.u, p.v);
    if (d == 0) continue;
    cloud.points.push_back(backproject_pixel(p.u, p.v, d * 1e-3, k));
  }
  if (cloud.empty()) throw Error(ErrorKind::EmptyCloud, "no foreground pixel has valid depth");
  return cloud;
}

PointCloud backproject(const DepthImage& depth, const BBox2D& region, const CameraIntrinsics& k) {
  check_grid(depth, k);
  const BBox2D b = region.clamped(depth.width, depth.height);
  // Pixel (u, v) is covered when its center u + 0.5 lies inside [x, x + w).
  const int u0 = static_cast<int>(std::ceil(b.x - 0.5));
  const int v0 = static_cast<int>(std::ceil(b.y - 0.5));
  const int u1 = static_cast<int>(std::ceil(b.x + b.w - 0.5));
  const int v1 = static_cast<int>(std::ceil(b.y + b.h - 0.5));
  PointCloud cloud;
  for (int v = std::max(0, v0); v < std::min(depth.height, v1); ++v) {
    for (int u = std::max(0, u0); u < std::min(depth.width, u1); ++u) {
      const std::uint16_t d = depth.at(u, v);
      if (d == 0) continue;
      cloud.points.push_back(backproject_pixel(u, v, d * 1e-3, k));
    }
  }
  if (cloud.empty()) throw Error(ErrorKind::EmptyCloud, "no pixel in the box has valid depth");
  return cloud;
}

// ---------------------------------------------------------------------------
// kd-tree over a point cloud, leaves stored as contiguous SoA blocks so the
// distance scan runs through the vector kernel.

namespace {

class KdTree {
 public:
  explicit KdTree(const std::vector<Eigen::Vector3d>& pts) : order_(pts.size()) {
    std::iota(order_.begin(), order_.end(), 0u);
    if (!pts.empty()) build(pts, 0, static_cast<std::uint32_t>(pts.size()));
    xs_.resize(pts.size());
    ys_.resize(pts.size());
    zs_.resize(pts.size());
    for (std::size_t i = 0; i < order_.size(); ++i) {
      xs_[i] = pts[order_[i]].x();
      ys_[i] = pts[order_[i]].y();
      zs_[i] = pts[order_[i]].z();
    }
    scratch_.resize(kLeafSize);
  }

  /// Squared distances of the k nearest points to q, excluding the point with
  /// original index `self`.
  void knn(const Eigen::Vector3d& q, std::size_t k, std::uint32_t self,
           std::vector<double>& out_sq) {
    heap_ = {};
    if (!nodes_.empty() && k > 0) search(0, q, k, self);
    out_sq.clear();
    while (!heap_.empty()) {
      out_sq.push_back(heap_.top());
      heap_.pop();
    }
  }

 private:
  static constexpr std::uint32_t kLeafSize = 16;

  struct Node {
    std::uint32_t begin, end;
    int axis;  // -1 for leaves
    double split;
    std::int32_t left, right;
  };

  std::int32_t build(const std::vector<Eigen::Vector3d>& pts, std::uint32_t begin,
                     std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({begin, end, -1, 0.0, -1, -1});
    if (end - begin <= kLeafSize) return id;
    Eigen::Vector3d lo = pts[order_[begin]], hi = lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      lo = lo.cwiseMin(pts[order_[i]]);
      hi = hi.cwiseMax(pts[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return pts[a][axis] < pts[b][axis] || (pts[a][axis] == pts[b][axis] && a < b);
                     });
    const double split = pts[order_[mid]][axis];
    const std::int32_t left = build(pts, begin, mid);
    const std::int32_t right = build(pts, mid, end);
    nodes_[static_cast<std::size_t>(id)].axis = axis;
    nodes_[static_cast<std::size_t>(id)].split = split;
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  void search(std::int32_t id, const Eigen::Vector3d& q, std::size_t k, std::uint32_t self) {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.axis < 0) {
      const std::size_t count = n.end - n.begin;
      const double qa[3] = {q.x(), q.y(), q.z()};
      kernels::active().sq_dist3(xs_.data() + n.begin, ys_.data() + n.begin,
                                 zs_.data() + n.begin, count, qa, scratch_.data());
      for (std::size_t i = 0; i < count; ++i) {
        if (order_[n.begin + i] == self) continue;
        const double d = scratch_[i];
        if (heap_.size() < k) {
          heap_.push(d);
        } else if (d < heap_.top()) {
          heap_.pop();
          heap_.push(d);
        }
      }
      return;
    }
    const double diff = q[n.axis] - n.split;
    const std::int32_t near = diff < 0 ? n.left : n.right;
    const std::int32_t far = diff < 0 ? n.right : n.left;
    search(near, q, k, self);
    if (heap_.size() < k || diff * diff < heap_.top()) search(far, q, k, self);
  }

  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::vector<double> xs_, ys_, zs_;
  std::vector<double> scratch_;
  std::priority_queue<double> heap_;
};

}  // namespace

std::vector<double> mean_knn_distances(const PointCloud& cloud, int k) {
  const std::size_t n = cloud.size();
  std::vector<double> out(n, 0.0);
  if (n < 2 || k < 1) return out;
  const std::size_t k_eff = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
  KdTree tree(cloud.points);
  std::vector<double> sq;
  for (std::size_t i = 0; i < n; ++i) {
    tree.knn(cloud.points[i], k_eff, static_cast<std::uint32_t>(i), sq);
    // Heap order is descending; sum ascending for a stable result.
    double acc = 0.0;
    for (auto it = sq.rbegin(); it != sq.rend(); ++it) acc += std::sqrt(*it);
    out[i] = acc / static_cast<double>(sq.size());
  }
  return out;
}

PointCloud denoise(const PointCloud& cloud, const DenoiseConfig& cfg) {
  cfg.validate();
  if (cloud.empty()) throw Error(ErrorKind::EmptyCloud, "denoise needs a non-empty cloud");
  PointCloud ranged;
  ranged.points.reserve(cloud.size());
  const double zmin = cfg.min_depth_mm * 1e-3;
  const double zmax = cfg.max_depth_mm * 1e-3;
  for (const auto& p : cloud.points) {
    if (p.z() >= zmin && p.z() <= zmax) ranged.points.push_back(p);
  }
  if (ranged.empty()) throw Error(ErrorKind::EmptyCloud, "no point inside the depth range");
  if (ranged.size() < 2) return ranged;

  const std::vector<double> dist = mean_knn_distances(ranged, cfg.k_neighbors);
  const double n = static_cast<double>(dist.size());
  double mean = 0.0;
  for (double d : dist) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : dist) var += (d - mean) * (d - mean);
  const double threshold = mean + cfg.std_ratio * std::sqrt(var / n);

  PointCloud out;
  out.points.reserve(ranged.size());
  for (std::size_t i = 0; i < ranged.size(); ++i) {
    if (dist[i] <= threshold) out.points.push_back(ranged.points[i]);
  }
  if (out.empty()) throw Error(ErrorKind::EmptyCloud, "outlier removal left no points");
  return out;
}

// ---------------------------------------------------------------------------
// PCA box fit

namespace {

using Vec3 = Eigen::Vector3d;

/// Minimiser of sum((p . u)^4) over unit u in span(a, b). Returns nullopt
/// when the fourth moment is flat in the plane.
std::optional<Vec3> quartic_axis_2d(const std::vector<Vec3>& centered, const Vec3& a,
                                    const Vec3& b) {
  double A = 0, B = 0, C = 0, Dm = 0, E = 0;
  for (const auto& p : centered) {
    const double x = p.dot(a), y = p.dot(b);
    const double x2 = x * x, y2 = y * y;
    A += x2 * x2;
    B += x2 * x * y;
    C += x2 * y2;
    Dm += x * y2 * y;
    E += y2 * y2;
  }
  // g(t) = k0 + c2 cos2t + s2 sin2t + c4 cos4t + s4 sin4t
  const double k0 = (3 * A + 6 * C + 3 * E) / 8;
  const double c2 = (A - E) / 2, s2 = B + Dm;
  const double c4 = (A - 6 * C + E) / 8, s4 = (B - Dm) / 2;
  const double amplitude = std::abs(c2) + std::abs(s2) + std::abs(c4) + std::abs(s4);
  if (!(k0 > 0) || amplitude <= 1e-9 * k0) return std::nullopt;

  auto g = [&](double t) {
    return c2 * std::cos(2 * t) + s2 * std::sin(2 * t) + c4 * std::cos(4 * t) + s4 * std::sin(4 * t);
  };
  constexpr int kGrid = 720;
  double best_t = 0, best = g(0);
  for (int i = 1; i < kGrid; ++i) {
    const double t = std::numbers::pi * i / kGrid;
    if (const double v = g(t); v < best) {
      best = v;
      best_t = t;
    }
  }
  double t = best_t;
  for (int it = 0; it < 50; ++it) {
    const double d1 = -2 * c2 * std::sin(2 * t) + 2 * s2 * std::cos(2 * t) -
                      4 * c4 * std::sin(4 * t) + 4 * s4 * std::cos(4 * t);
    const double d2 = -4 * c2 * std::cos(2 * t) - 4 * s2 * std::sin(2 * t) -
                      16 * c4 * std::cos(4 * t) - 16 * s4 * std::sin(4 * t);
    if (!(d2 > 0)) break;
    const double step = d1 / d2;
    t -= step;
    if (std::abs(step) < 1e-15) break;
  }
  if (!(g(t) <= best)) t = best_t;
  return (std::cos(t) * a + std::sin(t) * b).normalized();
}

/// Fourth-moment tensor contracted with u: returns g(u), gradient, Hessian.
struct Quartic {
  std::vector<Vec3> pts;

  double value(const Vec3& u) const {
    double acc = 0;
    for (const auto& p : pts) {
      const double s = p.dot(u);
      acc += s * s * s * s;
    }
    return acc;
  }
  void derivatives(const Vec3& u, Vec3& grad, Eigen::Matrix3d& hess) const {
    grad.setZero();
    hess.setZero();
    for (const auto& p : pts) {
      const double s = p.dot(u);
      grad += 4 * s * s * s * p;
      hess += 12 * s * s * p * p.transpose();
    }
  }
};

std::optional<Vec3> quartic_axis_3d(const std::vector<Vec3>& centered) {
  Quartic q{centered};
  // Fibonacci hemisphere.
  constexpr int kSamples = 600;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  double lo = 0, hi = 0;
  Vec3 best_u = Vec3::UnitX();
  for (int i = 0; i < kSamples; ++i) {
    const double z = 1.0 - (i + 0.5) / kSamples;  // (0, 1]
    const double r = std::sqrt(std::max(0.0, 1 - z * z));
    const double phi = golden * i;
    const Vec3 u(r * std::cos(phi), r * std::sin(phi), z);
    const double v = q.value(u);
    if (i == 0 || v < lo) {
      lo = v;
      best_u = u;
    }
    if (i == 0 || v > hi) hi = v;
  }
  if (!(hi > 0) || hi - lo <= 1e-9 * hi) return std::nullopt;

  Vec3 u = best_u;
  for (int it = 0; it < 60; ++it) {
    Vec3 grad;
    Eigen::Matrix3d hess;
    q.derivatives(u, grad, hess);
    // Tangent basis at u.
    Vec3 e1 = u.unitOrthogonal();
    Vec3 e2 = u.cross(e1);
    Eigen::Matrix<double, 3, 2> Bm;
    Bm << e1, e2;
    const Eigen::Vector2d rg = Bm.transpose() * grad;
    const Eigen::Matrix2d rh = Bm.transpose() * hess * Bm - u.dot(grad) * Eigen::Matrix2d::Identity();
    Eigen::Vector2d step;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(rh);
    if (es.eigenvalues().minCoeff() > 0) {
      step = -rh.ldlt().solve(rg);
    } else {
      step = -rg / std::max(1e-300, rh.norm());
    }
    const Vec3 next = (u + Bm * step).normalized();
    const double moved = (next - u).norm();
    if (q.value(next) > q.value(u) && moved > 1e-12) break;
    u = next;
    if (moved < 1e-15) break;
  }
  return u;
}

/// Orthonormal basis of the subspace spanned by `basis`, chosen by projecting
/// the camera axes x, y, z in turn.
std::vector<Vec3> camera_aligned_basis(const std::vector<Vec3>& basis) {
  std::vector<Vec3> out;
  for (int axis = 0; axis < 3 && out.size() < basis.size(); ++axis) {
    const Vec3 e = Vec3::Unit(axis);
    Vec3 w = Vec3::Zero();
    for (const auto& b : basis) w += b.dot(e) * b;
    for (const auto& o : out) w -= o.dot(w) * o;
    if (w.norm() > 1e-6) out.push_back(w.normalized());
  }
  return out;
}

/// Replaces the axes of a tied eigenspace.
std::vector<Vec3> resolve_tied(const std::vector<Vec3>& centered, const std::vector<Vec3>& basis) {
  if (basis.size() == 2) {
    if (auto u = quartic_axis_2d(centered, basis[0], basis[1])) {
      const Vec3 normal = basis[0].cross(basis[1]);
      return {*u, normal.cross(*u).normalized()};
    }
    return camera_aligned_basis(basis);
  }
  if (auto u = quartic_axis_3d(centered)) {
    const Vec3 a = u->unitOrthogonal();
    const Vec3 b = u->cross(a).normalized();
    if (auto v = quartic_axis_2d(centered, a, b)) return {*u, *v, u->cross(*v).normalized()};
    auto rest = camera_aligned_basis({a, b});
    return {*u, rest[0], rest[1]};
  }
  return camera_aligned_basis(basis);
}

/// Orders axes of one tie group: slot i takes the remaining axis most aligned
/// with camera axis i.
void order_by_camera_alignment(std::vector<Vec3>& axes) {
  for (std::size_t slot = 0; slot < axes.size(); ++slot) {
    std::size_t best = slot;
    for (std::size_t j = slot + 1; j < axes.size(); ++j) {
      if (std::abs(axes[j][static_cast<int>(slot)]) > std::abs(axes[best][static_cast<int>(slot)]) + 1e-12) {
        best = j;
      }
    }
    std::swap(axes[slot], axes[best]);
  }
}

void fix_sign(Vec3& v) {
  int idx = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(v[i]) > std::abs(v[idx]) + 1e-12) idx = i;
  }
  if (v[idx] < 0) v = -v;
}

}  // namespace

OrientedBox3D pca_fit_box(const PointCloud& cloud) {
  if (cloud.size() < 4) throw Error(ErrorKind::DegenerateCloud, "need at least 4 points");
  const double n = static_cast<double>(cloud.size());
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : cloud.points) centroid += p;
  centroid /= n;
  std::vector<Vec3> centered;
  centered.reserve(cloud.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : cloud.points) {
    centered.push_back(p - centroid);
    cov += centered.back() * centered.back().transpose();
  }
  cov /= n;
  if (!cov.allFinite()) throw Error(ErrorKind::DegenerateCloud, "non-finite coordinates");

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  // Descending order.
  std::array<double, 3> lambda{es.eigenvalues()(2), es.eigenvalues()(1), es.eigenvalues()(0)};
  std::vector<Vec3> axes{es.eigenvectors().col(2), es.eigenvectors().col(1),
                         es.eigenvectors().col(0)};
  const double scale = std::max(lambda[0], 0.0);
  if (!(scale > 1e-24)) throw Error(ErrorKind::DegenerateCloud, "covariance has rank 0");

  // Group tied eigenvalues and pin down their axes.
  const double tie_tol = 1e-9 * scale;
  std::size_t start = 0;
  while (start < 3) {
    std::size_t end = start + 1;
    while (end < 3 && lambda[end - 1] - lambda[end] <= tie_tol) ++end;
    if (end - start > 1) {
      std::vector<Vec3> group(axes.begin() + static_cast<long>(start),
                              axes.begin() + static_cast<long>(end));
      group = resolve_tied(centered, group);
      order_by_camera_alignment(group);
      std::copy(group.begin(), group.end(), axes.begin() + static_cast<long>(start));
    }
    start = end;
  }

  auto extents = [&](const std::vector<Vec3>& ax, Vec3& lo, Vec3& hi) {
    lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    hi = -lo;
    for (const auto& p : centered) {
      for (int i = 0; i < 3; ++i) {
        const double s = p.dot(ax[static_cast<std::size_t>(i)]);
        lo[i] = std::min(lo[i], s);
        hi[i] = std::max(hi[i], s);
      }
    }
  };
  Vec3 lo, hi;
  extents(axes, lo, hi);
  Vec3 ext = hi - lo;
  // Longest first; near-equal extents keep their eigen order.
  std::array<int, 3> perm{0, 1, 2};
  const double ext_tol = 1e-9 * std::max(1e-12, ext.maxCoeff());
  for (int pass = 0; pass < 2; ++pass) {
    for (int j = 0; j < 2; ++j) {
      if (ext[perm[static_cast<std::size_t>(j + 1)]] > ext[perm[static_cast<std::size_t>(j)]] + ext_tol) {
        std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(j + 1)]);
      }
    }
  }
  std::vector<Vec3> ordered{axes[static_cast<std::size_t>(perm[0])],
                            axes[static_cast<std::size_t>(perm[1])],
                            axes[static_cast<std::size_t>(perm[2])]};
  fix_sign(ordered[0]);
  ordered[1] -= ordered[1].dot(ordered[0]) * ordered[0];
  ordered[1].normalize();
  fix_sign(ordered[1]);
  ordered[2] = ordered[0].cross(ordered[1]).normalized();

  extents(ordered, lo, hi);
  OrientedBox3D box;
  box.R.col(0) = ordered[0];
  box.R.col(1) = ordered[1];
  box.R.col(2) = ordered[2];
  box.D = hi - lo;
  box.T = centroid + box.R * (0.5 * (lo + hi));
  return box;
}

double iou_2d(const BBox2D& a, const BBox2D& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Lifting a detection

PointCloud lift_cloud(const DepthImage& depth, const BBox2D& bbox, const BinaryMask* mask,
                      const CameraIntrinsics& k, const DenoiseConfig& cfg) {
  try {
    PointCloud raw = mask ? backproject(depth, *mask, k) : backproject(depth, bbox, k);
    return denoise(raw, cfg);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::EmptyCloud) return {};
    throw;
  }
}

namespace {

double median_depth_m(const DepthImage& depth, const BBox2D& bbox, const BinaryMask* mask) {
  std::vector<std::uint16_t> vals;
  if (mask && mask->width == depth.width && mask->height == depth.height) {
    for (const Pixel& p : decode_mask(*mask)) {
      if (auto d = depth.at(p.u, p.v)) vals.push_back(d);
    }
  }
  if (vals.empty()) {
    const BBox2D b = bbox.clamped(depth.width, depth.height);
    const int u0 = std::max(0, static_cast<int>(std::floor(b.x)));
    const int v0 = std::max(0, static_cast<int>(std::floor(b.y)));
    const int u1 = std::min(depth.width, static_cast<int>(std::ceil(b.x + b.w)));
    const int v1 = std::min(depth.height, static_cast<int>(std::ceil(b.y + b.h)));
    for (int v = v0; v < v1; ++v)
      for (int u = u0; u < u1; ++u)
        if (auto d = depth.at(u, v)) vals.push_back(d);
  }
  if (vals.empty()) return 1.0;
  auto mid = vals.begin() + static_cast<long>(vals.size() / 2);
  std::nth_element(vals.begin(), mid, vals.end());
  return *mid * 1e-3;
}

}  // namespace

LiftedBox lift_region(const DepthImage& depth, const BBox2D& bbox, const BinaryMask* mask,
                      const CameraIntrinsics& k, const LiftConfig& cfg) {
  check_grid(depth, k);
  LiftedBox out;
  PointCloud cloud = lift_cloud(depth, bbox, mask, k, cfg.denoise);
  out.n_points = cloud.size();
  if (!cloud.empty()) {
    try {
      out.box = pca_fit_box(cloud);
      return out;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateCloud) throw;
    }
  }
  out.degenerate = true;
  // Box coordinates are pixel edges; pixel (u, v) is centered at (u + 0.5, v + 0.5).
  out.box.T = backproject_pixel(bbox.center_x() - 0.5, bbox.center_y() - 0.5,
                                median_depth_m(depth, bbox, mask), k);
  out.box.R = Eigen::Matrix3d::Identity();
  out.box.D = Vec3::Constant(cfg.fallback_extent_m);
  return out;
}

void write_point_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  char line[128];
  for (const auto& p : cloud.points) {
    std::snprintf(line, sizeof line, "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out << line;
  }
}

}  // namespace srg
