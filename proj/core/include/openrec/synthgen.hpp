#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "openrec/pointcloud.hpp"

namespace openrec {

enum class ShapeKind { Box, Cylinder, Sphere, Cone, Plate };

std::string_view to_string(ShapeKind kind);
ShapeKind parse_shape_kind(std::string_view name);

/// Number of dimensions each kind takes:
///   box    (size_x, size_y, size_z)
///   plate  (size_x, size_y, thickness)
///   cylinder, cone (radius, height)
///   sphere (radius)
/// Shapes are centered on their bounding box; z is the height axis.
std::size_t dimension_count(ShapeKind kind);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Box;
  std::vector<double> dimensions{0.1, 0.1, 0.1};
  int points = 1000;
  double noise_sigma = 0.0;
  /// Object frame to output frame.
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  std::uint64_t seed = 1;
  /// When set (output frame), only surface samples facing this point are kept,
  /// which is exact self-occlusion for these convex shapes.
  std::optional<Point3> visible_from;

  /// Throws InvalidArgument on wrong dimension count, non-positive dimensions
  /// or fewer than 50 points.
  void validate() const;
  /// Distance from the center to the lowest point along z.
  double half_height() const;
};

/// Area-uniform surface samples, posed, then per-axis Gaussian noise.
/// Deterministic per seed. Returns exactly spec.points points.
PointCloud generate_view(const ShapeSpec& spec);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct CategoryFamily {
  std::string name;
  ShapeKind kind = ShapeKind::Box;
  std::vector<double> dimensions;
  double jitter = 0.15;  // each dimension scaled by U(1 - jitter, 1 + jitter)
};

/// Five desk-scale categories: box, cylinder, sphere, cone, plate.
std::vector<CategoryFamily> default_families();

struct DatasetSpec {
  std::vector<CategoryFamily> categories = default_families();
  int views_per_category = 40;
  int points = 1000;
  double noise_sigma = 0.002;
  std::uint64_t seed = 1;
  /// Partial views from a camera at the origin; otherwise the full surface.
  bool partial_views = true;
  double camera_distance = 0.8;
  double min_elevation_deg = 15.0;
  double max_elevation_deg = 75.0;
  /// Assign each category to context A or B at random (half each, A rounded up).
  bool assign_contexts = false;
};

struct GeneratedView {
  std::string category;
  std::string file;  // relative to the dataset root
  ShapeSpec spec;
};

struct GeneratedDataset {
  DatasetSpec spec;
  std::vector<GeneratedView> views;
  std::map<std::string, char> contexts;  // empty unless assigned
};

/// Draws every view's shape parameters; no I/O.
GeneratedDataset plan_dataset(const DatasetSpec& spec);

/// plan_dataset + writes <root>/<category>/view_####.pcd and
/// <root>/manifest.json.
GeneratedDataset generate_dataset(const DatasetSpec& spec, const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Table-top scenes
// ---------------------------------------------------------------------------

struct TableSpec {
  double size_x = 1.2;
  double size_y = 0.8;
  double height = 0.7;
  int points = 3000;
  double noise_sigma = 0.002;
  int floor_clutter = 200;  // points on the floor around the table
  int outliers = 50;        // uniform points in the volume around the table
};

struct Scene {
  PointCloud cloud;
  /// 0 table, 1..K objects in input order, -1 clutter and outliers.
  std::vector<int> labels;
};

/// Objects are given with poses in the table frame (table top at z = height).
Scene generate_scene(const std::vector<ShapeSpec>& objects, const TableSpec& table,
                     std::uint64_t seed);

/// Pose that stands `spec` upright on the table top at (x, y) with yaw.
Eigen::Isometry3d on_table_pose(const ShapeSpec& spec, const TableSpec& table, double x, double y,
                                double yaw);

}  // namespace openrec
