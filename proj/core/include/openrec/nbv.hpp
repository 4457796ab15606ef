#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "openrec/pointcloud.hpp"

namespace openrec {

/// Camera-to-world rigid transform: p_world = rotation * p_cam + translation.
/// The camera looks along its +z axis.
struct CameraPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Point3 to_camera(const Point3& p) const { return rotation.transpose() * (p - translation); }

  /// Throws InvalidArgument unless rotation is orthonormal with det = +1
  /// (tolerance 1e-9).
  void validate() const;

  /// Camera at `eye` looking at `target`; `up` fixes the roll.
  static CameraPose look_at(const Point3& eye, const Point3& target,
                            const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());
};

/// Clusters of a rendered scene. Areas are visible point counts; total_area
/// defaults to their sum.
struct SegmentedScene {
  std::vector<double> areas;
  double total_area = 0.0;

  static SegmentedScene from_clusters(const std::vector<PointCloud>& clusters);
  static SegmentedScene from_areas(std::vector<double> areas);
};

/// H = -sum (A_i / S) ln(A_i / S). Throws InvalidArgument on no clusters, a
/// non-positive area, or S < sum A_i.
double viewpoint_entropy(const SegmentedScene& scene);

struct RenderParams {
  int resolution = 128;
  /// Side of the square orthographic window in meters; by default it fits the
  /// camera-frame x/y bounding box of the world plus `margin` on each side.
  std::optional<double> extent;
  double margin = 0.05;
};

/// Indices of the world points that survive the z-buffer: one per pixel, the
/// smallest positive camera z; ties keep the lowest index. Sorted ascending.
std::vector<std::size_t> render_virtual_indices(const PointCloud& world, const CameraPose& pose,
                                                const RenderParams& params = {});
PointCloud render_virtual(const PointCloud& world, const CameraPose& pose,
                          const RenderParams& params = {});

/// Gaussian weight of the translation distance between the candidate and
/// current poses: 1 / (sigma sqrt(2 pi)) exp(-d^2 / (2 sigma^2)).
double gaussian_weight(const CameraPose& v, const CameraPose& current, double sigma);
double weighted_entropy(double H, const CameraPose& v, const CameraPose& current, double sigma);

/// w_i / sum w. Throws InvalidArgument when a weight is negative or all are 0.
std::vector<double> selection_probabilities(std::span<const double> weights);

std::size_t select_next_view(std::span<const double> weights, std::mt19937_64& rng);
std::size_t select_next_view(std::span<const double> weights, std::uint64_t seed);

struct NbvParams {
  double sigma = 0.5;
  RenderParams render;
  double cluster_link = 0.03;
  std::size_t cluster_min_pts = 10;
};

struct CandidateScore {
  std::size_t index = 0;
  std::size_t visible_points = 0;
  std::size_t clusters = 0;
  double entropy = 0.0;
  double weighted = 0.0;
  double probability = 0.0;
};

/// Renders every candidate, splits the visible points into clusters (by
/// `labels` when given, negative labels excluded, else Euclidean clustering)
/// and scores it. A render with no cluster scores 0. Probabilities are left
/// at 0 when every weighted entropy is 0.
std::vector<CandidateScore> evaluate_candidates(const PointCloud& world,
                                                std::span<const CameraPose> candidates,
                                                const CameraPose& current, const NbvParams& params,
                                                std::span<const int> labels = {});

/// JSON list of {"rotation": [9 numbers, row-major], "translation": [3]}.
std::vector<CameraPose> parse_poses_json(const std::string& text);

}  // namespace openrec
