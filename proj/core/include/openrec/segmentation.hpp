#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "openrec/pointcloud.hpp"

namespace openrec {

/// Plane {p : normal . p + d = 0} with the scene indices of its inliers.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double d = 0.0;
  std::vector<std::size_t> inliers;

  double signed_distance(const Point3& p) const { return normal.dot(p) + d; }
  Plane flipped() const { return Plane{-normal, -d, inliers}; }
};

/// RANSAC over `iterations` hypotheses, each a plane through three sampled
/// non-collinear points; keeps the one with most points at distance < tau
/// (ties keep the earlier hypothesis), then refits it by least squares to its
/// consensus set twice. The returned normal is canonicalized so
/// its first non-zero component among (z, y, x) is positive.
/// Deterministic for a given seed.
Plane ransac_plane(const PointCloud& scene, double tau, int iterations, std::uint64_t seed);

/// 2D convex polygon in a plane, stored counter-clockwise in the plane's
/// (u, v) basis.
struct PlaneHull {
  Eigen::Vector3d origin;
  Eigen::Vector3d u;
  Eigen::Vector3d v;
  std::vector<Eigen::Vector2d> vertices;

  Eigen::Vector2d project(const Point3& p) const { return {u.dot(p - origin), v.dot(p - origin)}; }
  /// Inside or on the boundary, with 1e-9 slack.
  bool contains(const Eigen::Vector2d& q) const;
  /// Euclidean distance to the polygon boundary (positive inside and outside).
  double boundary_distance(const Eigen::Vector2d& q) const;
};

/// Convex hull of the plane inliers projected into the plane. Throws
/// InvalidArgument with fewer than 3 inliers or a collinear inlier set.
PlaneHull plane_hull(const PointCloud& scene, const Plane& plane);

/// Points whose signed distance to the plane lies strictly inside
/// (min_h, max_h) and whose projection falls inside the inlier hull.
PointCloud extract_prism(const PointCloud& scene, const Plane& plane, double min_h, double max_h);
std::vector<std::size_t> extract_prism_indices(const PointCloud& scene, const Plane& plane,
                                               double min_h, double max_h);

/// Connected components of the graph linking points closer than `link_dist`.
/// Each component lists its point indices in ascending order; components are
/// ordered by their lowest index. Components with size outside
/// [min_pts, max_pts] are dropped.
std::vector<std::vector<std::size_t>> euclidean_cluster_indices(const PointCloud& cloud,
                                                                double link_dist,
                                                                std::size_t min_pts,
                                                                std::size_t max_pts);

std::vector<PointCloud> euclidean_cluster(const PointCloud& cloud, double link_dist,
                                          std::size_t min_pts, std::size_t max_pts);

PointCloud select(const PointCloud& cloud, const std::vector<std::size_t>& indices);

/// Boolean constraints attached to each candidate. `instructor`, `robot`,
/// `tracked` and `key_view` need a live tracker / body model and are left to
/// the caller.
struct CandidateFlags {
  bool on_table = false;
  bool tracked = true;
  bool size_ok = false;
  bool near_edge = false;
  bool is_key_view = true;
  bool instructor = false;
  bool robot = false;
};

/// C_table & C_track & C_size & !(C_instructor | C_robot | C_edge)
bool detection_expression(const CandidateFlags& f);
/// C_table & C_track & C_key_view & !(C_instructor | C_robot)
bool exploration_expression(const CandidateFlags& f);

struct ObjectCandidate {
  PointCloud cloud;
  int track_id = 0;
  CandidateFlags flags;
};

struct DetectionParams {
  double plane_tau = 0.02;
  int plane_iterations = 200;
  std::uint64_t seed = 1;
  /// Table normal is flipped, if needed, to point along `up`.
  Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  /// The table is the largest patch of plane inliers linked within this distance;
  /// stray inliers elsewhere do not widen the hull.
  double table_link = 0.06;
  double prism_min_h = 0.005;
  double prism_max_h = 0.5;
  double link_dist = 0.03;
  std::size_t min_pts = 30;
  std::size_t max_pts = 50000;
  /// Largest AABB edge accepted as manipulable.
  double min_size = 0.01;
  double max_size = 0.5;
  double edge_margin = 0.05;
  /// Oversized clusters are re-split once with link_dist * refine_link_ratio.
  double refine_link_ratio = 0.5;
  int first_track_id = 1;
};

struct Detection {
  Plane table;
  PlaneHull hull;
  /// Every cluster with its flags, before the detection expression filters.
  std::vector<ObjectCandidate> all;
  /// Candidates satisfying the detection expression.
  std::vector<ObjectCandidate> accepted;
};

/// ransac_plane -> extract_prism -> euclidean_cluster -> flags.
Detection detect(const PointCloud& scene, const DetectionParams& params);
std::vector<ObjectCandidate> detect_objects(const PointCloud& scene, const DetectionParams& params);

}  // namespace openrec
