#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "openrec/error.hpp"

namespace openrec {

/// 3D point in meters.
using Point3 = Eigen::Vector3d;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Ordered list of points with optional per-point color.
/// When `colors` is non-empty it has exactly one entry per point.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<Rgb> colors;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool has_colors() const noexcept { return !colors.empty(); }

  void push_back(const Point3& p) { points.push_back(p); }
  void push_back(const Point3& p, const Rgb& c) {
    points.push_back(p);
    colors.push_back(c);
  }
};

/// Object-centered right-handed frame. Columns of `axes` are X, Y, Z expressed
/// in the parent (world) frame.
struct ReferenceFrame {
  Point3 origin = Point3::Zero();
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();

  Eigen::Vector3d x_axis() const { return axes.col(0); }
  Eigen::Vector3d y_axis() const { return axes.col(1); }
  Eigen::Vector3d z_axis() const { return axes.col(2); }

  /// World point expressed in frame coordinates.
  Point3 to_local(const Point3& p) const { return axes.transpose() * (p - origin); }
  PointCloud to_local(const PointCloud& cloud) const;
};

struct BoundingBox {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  Eigen::Vector3d extent() const { return max - min; }
  double largest_edge() const { return extent().maxCoeff(); }
};

/// Rigid motion applied to every point (colors preserved).
PointCloud transform(const PointCloud& cloud, const Eigen::Isometry3d& motion);

/// Keeps exactly the finite points with |p_i - center_i| <= side/2 on every axis.
PointCloud crop_cube(const PointCloud& cloud, const Point3& center, double side);

/// Drops points with any non-finite coordinate.
PointCloud remove_non_finite(const PointCloud& cloud);

/// Integer voxel cell of a point for a grid anchored at `anchor`:
/// floor((p - anchor) / voxel) per axis.
Eigen::Vector3i voxel_index(const Point3& p, const Point3& anchor, double voxel);

/// One point per occupied voxel, equal to the centroid of the voxel's points.
/// The grid is anchored at the componentwise cloud minimum, so results depend on
/// translation only through the grid phase. Output is ordered by voxel index
/// (lexicographic x, y, z).
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

Point3 centroid(const PointCloud& cloud);

/// Normalized (1/m) covariance about the centroid.
Eigen::Matrix3d covariance(const PointCloud& cloud, const Point3& center);

/// Componentwise minimum / maximum of the raw coordinates.
BoundingBox aabb(const PointCloud& cloud);

/// Bounding box of the cloud expressed in `frame` coordinates.
BoundingBox aabb_in_frame(const PointCloud& cloud, const ReferenceFrame& frame);

struct EigenDecomposition {
  Eigen::Vector3d values;   // descending
  Eigen::Matrix3d vectors;  // column i pairs with values(i)
};

/// Symmetric 3x3 eigen-decomposition with eigenvalues sorted descending.
/// Near-equal eigenvalues (|diff| < 1e-12) are ordered by lexicographic
/// comparison of their eigenvector components, larger first.
EigenDecomposition sorted_eigen(const Eigen::Matrix3d& symmetric);

/// Fraction of the cloud's reach along v1/v2: 0.015 m for a 20 cm object.
inline constexpr double kDefaultSignThreshold = 0.15;

/// Unique object frame from PCA plus point-count sign disambiguation.
///
/// Provisional axes are the two dominant eigenvectors v1, v2 of the covariance.
/// With the cloud expressed in that provisional frame, S_x = +1 when
/// |{x > t}| > |{x < -t}|, -1 when fewer, and the sign of sum x^3 on a tie;
/// S_y likewise on y.
/// t = sign_threshold * max |x|, |y|, so the frame is invariant to uniform scaling.
/// The final frame is (S_x v1, S_y v2, X x Y), always right-handed.
///
/// Throws DegenerateInput for fewer than 3 points, collinear or coincident
/// points, or isotropic covariance (no dominant axis).
ReferenceFrame compute_reference_frame(const PointCloud& cloud,
                                       double sign_threshold = kDefaultSignThreshold);

}  // namespace openrec
