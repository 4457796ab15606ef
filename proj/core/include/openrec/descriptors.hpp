#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "openrec/pointcloud.hpp"

namespace openrec {

// ---------------------------------------------------------------------------
// GOOD: global orthographic object descriptor
// ---------------------------------------------------------------------------

/// Orthographic projection planes of the object frame. The projected point
/// (alpha, beta) is (x, z) for XoZ, (x, y) for XoY and (y, z) for YoZ; alpha
/// selects the row, beta the column of the distribution matrix.
enum class ProjectionPlane { XoZ = 0, XoY = 1, YoZ = 2 };

std::string_view to_string(ProjectionPlane plane);

inline constexpr double kGoodEpsilon = 1e-6;  // relative to l
inline constexpr int kDefaultGoodBins = 15;

/// n x n distribution matrix of `cloud_in_frame` projected on `plane` over an
/// l x l square centered on the frame origin. Bin of a point:
/// r = floor(n (alpha + l/2) / (l (1 + eps))), c likewise with beta. eps is
/// relative to l so the binning is exactly scale-homogeneous.
/// Normalized to total mass 1.
/// Throws InvalidArgument on an empty cloud, n < 2, l <= 0, or a point with
/// |alpha| or |beta| > l/2 ("l not enclosing").
Eigen::MatrixXd project_distribution(const PointCloud& cloud_in_frame, ProjectionPlane plane,
                                     double l, int n, double epsilon = kGoodEpsilon);

/// Row-major flattening [M(0,0), M(0,1), ..., M(n-1,n-1)].
std::vector<double> flatten_row_major(const Eigen::MatrixXd& m);

/// Shannon entropy in bits over all entries; 0 log 0 = 0.
double projection_entropy(std::span<const double> m);

/// Variance of the bin index under the pmf, with 1-based indices.
double projection_variance(std::span<const double> m);

struct GoodDescriptor {
  std::vector<double> bins;  // 3 n^2 values, three consecutive probability blocks
  int n = 0;
  ReferenceFrame frame;
  std::array<ProjectionPlane, 3> order{};
  double side_length = 0.0;  // l
};

struct GoodParams {
  int n = kDefaultGoodBins;
  double sign_threshold = kDefaultSignThreshold;
  double epsilon = kGoodEpsilon;
};

/// Frame via compute_reference_frame; l = 2 max|coordinate| in that frame
/// (the tightest centered box); blocks ordered highest-entropy first, then the
/// remaining two by increasing variance. Values within 1e-9 fall back to the
/// fixed precedence XoZ < XoY < YoZ.
GoodDescriptor compute_good(const PointCloud& cloud, const GoodParams& params = {});
inline GoodDescriptor compute_good(const PointCloud& cloud, int n) {
  return compute_good(cloud, GoodParams{n});
}

// ---------------------------------------------------------------------------
// Spin-images over voxel-selected keypoints
// ---------------------------------------------------------------------------

struct SpinImageParams {
  double voxel = 0.01;         // keypoint voxel size (VS)
  int image_width = 4;         // IW
  double support_length = 0.05;  // SL, meters
  double support_angle_deg = 90.0;  // A
  int normal_k = 10;
};

struct SpinImage {
  Eigen::MatrixXd histogram;  // (IW+1) x (2 IW + 1), raw counts
  Point3 keypoint = Point3::Zero();
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();

  /// Row-major flattening used as the feature vector.
  Eigen::VectorXd flattened() const;
};

struct FeatureSet {
  std::vector<SpinImage> spin_images;

  std::size_t size() const noexcept { return spin_images.size(); }
  std::vector<Eigen::VectorXd> vectors() const;
};

/// One keypoint per occupied voxel (grid anchored at the cloud minimum): the
/// original point nearest the voxel center, lowest index on ties. Ordered by
/// voxel index.
std::vector<std::size_t> extract_keypoint_indices(const PointCloud& cloud, double voxel);
std::vector<Point3> extract_keypoints(const PointCloud& cloud, double voxel);

/// Per-point unit normals from PCA over the k nearest neighbors (including the
/// point), oriented toward `viewpoint`.
std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k = 10,
                                              const Point3& viewpoint = Point3::Zero());

/// Radial / elevation coordinates of `x` about keypoint p with normal n.
struct SpinCoordinates {
  double alpha;
  double beta;
};
SpinCoordinates spin_coordinates(const Point3& p, const Eigen::Vector3d& n, const Point3& x);

/// Spin-image at `keypoint`. Neighbors are the points with alpha <= SL and
/// |beta| <= SL whose normal is within the support angle of `normal`; each adds
/// one count at (floor(alpha IW / SL), floor((beta + SL) IW / SL)), clamped.
SpinImage compute_spin_image(const PointCloud& cloud, std::span<const Eigen::Vector3d> normals,
                             const Point3& keypoint, const Eigen::Vector3d& normal,
                             const SpinImageParams& params);

/// Estimates normals, selects keypoints, computes one spin-image per keypoint.
FeatureSet compute_feature_set(const PointCloud& cloud, const SpinImageParams& params = {});

}  // namespace openrec
