#include "openrec/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "openrec/nbv.hpp"
#include "openrec/pcd_io.hpp"
#include "openrec/seed.hpp"
#include "openrec/serialization.hpp"

namespace openrec {

namespace {

constexpr double kPi = std::numbers::pi;

struct SurfaceSample {
  Point3 p;
  Eigen::Vector3d n;
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

SurfaceSample sample_box(Rng& rng, double sx, double sy, double sz) {
  const std::array<double, 3> s{sx, sy, sz};
  const std::array<double, 3> area{sy * sz, sx * sz, sx * sy};  // faces normal to x, y, z
  const double total = 2.0 * (area[0] + area[1] + area[2]);
  double r = uniform(rng, 0.0, total);
  int axis = 0;
  while (axis < 2 && r >= 2.0 * area[static_cast<std::size_t>(axis)]) {
    r -= 2.0 * area[static_cast<std::size_t>(axis)];
    ++axis;
  }
  const double sign = uniform(rng) < 0.5 ? -1.0 : 1.0;
  SurfaceSample out;
  for (int a = 0; a < 3; ++a) {
    const double half = s[static_cast<std::size_t>(a)] / 2.0;
    out.p(a) = a == axis ? sign * half : uniform(rng, -half, half);
  }
  out.n = Eigen::Vector3d::Zero();
  out.n(axis) = sign;
  return out;
}

SurfaceSample sample_disk(Rng& rng, double radius, double z, double nz) {
  const double rho = radius * std::sqrt(uniform(rng));
  const double phi = uniform(rng, 0.0, 2.0 * kPi);
  return {{rho * std::cos(phi), rho * std::sin(phi), z}, {0.0, 0.0, nz}};
}

SurfaceSample sample_cylinder(Rng& rng, double r, double h) {
  const double side = 2.0 * kPi * r * h;
  const double cap = kPi * r * r;
  const double u = uniform(rng, 0.0, side + 2.0 * cap);
  if (u < side) {
    const double phi = uniform(rng, 0.0, 2.0 * kPi);
    return {{r * std::cos(phi), r * std::sin(phi), uniform(rng, -h / 2, h / 2)},
            {std::cos(phi), std::sin(phi), 0.0}};
  }
  return u < side + cap ? sample_disk(rng, r, h / 2, 1.0) : sample_disk(rng, r, -h / 2, -1.0);
}

SurfaceSample sample_sphere(Rng& rng, double r) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector3d d(g(rng), g(rng), g(rng));
  while (d.norm() < 1e-12) d = Eigen::Vector3d(g(rng), g(rng), g(rng));
  d.normalize();
  return {r * d, d};
}

// Apex at +h/2, base disk at -h/2.
SurfaceSample sample_cone(Rng& rng, double r, double h) {
  const double slant = std::sqrt(r * r + h * h);
  const double lateral = kPi * r * slant;
  const double base = kPi * r * r;
  if (uniform(rng, 0.0, lateral + base) >= lateral) return sample_disk(rng, r, -h / 2, -1.0);
  // Lateral area grows linearly with distance from the apex.
  const double t = std::sqrt(uniform(rng));
  const double phi = uniform(rng, 0.0, 2.0 * kPi);
  const double rho = r * t;
  const Point3 p(rho * std::cos(phi), rho * std::sin(phi), h / 2 - t * h);
  const Eigen::Vector3d n = Eigen::Vector3d(h * std::cos(phi), h * std::sin(phi), r).normalized();
  return {p, n};
}

SurfaceSample sample_surface(const ShapeSpec& spec, Rng& rng) {
  const auto& d = spec.dimensions;
  switch (spec.kind) {
    case ShapeKind::Box:
    case ShapeKind::Plate: return sample_box(rng, d[0], d[1], d[2]);
    case ShapeKind::Cylinder: return sample_cylinder(rng, d[0], d[1]);
    case ShapeKind::Sphere: return sample_sphere(rng, d[0]);
    case ShapeKind::Cone: return sample_cone(rng, d[0], d[1]);
  }
  throw InvalidArgument("unknown shape kind");
}

}  // namespace

std::string_view to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Box: return "box";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Sphere: return "sphere";
    case ShapeKind::Cone: return "cone";
    case ShapeKind::Plate: return "plate";
  }
  return "?";
}

ShapeKind parse_shape_kind(std::string_view name) {
  for (auto k : {ShapeKind::Box, ShapeKind::Cylinder, ShapeKind::Sphere, ShapeKind::Cone, ShapeKind::Plate})
    if (to_string(k) == name) return k;
  throw InvalidArgument("unknown shape kind '" + std::string(name) + "'");
}

std::size_t dimension_count(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Box:
    case ShapeKind::Plate: return 3;
    case ShapeKind::Cylinder:
    case ShapeKind::Cone: return 2;
    case ShapeKind::Sphere: return 1;
  }
  return 0;
}

void ShapeSpec::validate() const {
  if (dimensions.size() != dimension_count(kind))
    throw InvalidArgument(std::string(to_string(kind)) + " takes " +
                          std::to_string(dimension_count(kind)) + " dimensions");
  for (double v : dimensions)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("shape dimensions must be positive");
  if (points < 50) throw InvalidArgument("shape needs at least 50 points");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("noise_sigma must be >= 0");
}

double ShapeSpec::half_height() const {
  switch (kind) {
    case ShapeKind::Box:
    case ShapeKind::Plate: return dimensions[2] / 2;
    case ShapeKind::Cylinder:
    case ShapeKind::Cone: return dimensions[1] / 2;
    case ShapeKind::Sphere: return dimensions[0];
  }
  return 0.0;
}

PointCloud generate_view(const ShapeSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);

  PointCloud out;
  out.points.reserve(static_cast<std::size_t>(spec.points));
  const long max_draws = 200L * spec.points;
  for (long draw = 0; out.size() < static_cast<std::size_t>(spec.points); ++draw) {
    if (draw >= max_draws) throw InvalidArgument("generate_view: viewpoint sees too little of the shape");
    const SurfaceSample s = sample_surface(spec, rng);
    const Point3 p = spec.pose * s.p;
    if (spec.visible_from && (spec.pose.linear() * s.n).dot(*spec.visible_from - p) <= 0.0) continue;
    out.points.push_back(p);
  }
  if (spec.noise_sigma > 0.0)
    for (auto& p : out.points) p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
  return out;
}

std::vector<CategoryFamily> default_families() {
  return {
      {"box", ShapeKind::Box, {0.12, 0.08, 0.06}, 0.15},
      {"cylinder", ShapeKind::Cylinder, {0.035, 0.14}, 0.15},
      {"sphere", ShapeKind::Sphere, {0.045}, 0.15},
      {"cone", ShapeKind::Cone, {0.05, 0.12}, 0.15},
      {"plate", ShapeKind::Plate, {0.16, 0.11, 0.012}, 0.15},
  };
}

GeneratedDataset plan_dataset(const DatasetSpec& spec) {
  if (spec.categories.empty()) throw InvalidArgument("dataset: no categories");
  if (spec.views_per_category < 1) throw InvalidArgument("dataset: views_per_category must be >= 1");
  if (!(spec.min_elevation_deg <= spec.max_elevation_deg))
    throw InvalidArgument("dataset: min_elevation_deg must be <= max_elevation_deg");

  GeneratedDataset out;
  out.spec = spec;
  for (std::size_t c = 0; c < spec.categories.size(); ++c) {
    const CategoryFamily& fam = spec.categories[c];
    if (fam.name.empty() || fam.name.find_first_of("/\\") != std::string::npos)
      throw InvalidArgument("dataset: invalid category name '" + fam.name + "'");
    if (!(fam.jitter >= 0.0 && fam.jitter < 1.0)) throw InvalidArgument("dataset: jitter must be in [0, 1)");
    Rng rng(mix_seed(spec.seed, hash_label(fam.name)));
    for (int v = 0; v < spec.views_per_category; ++v) {
      GeneratedView view;
      view.category = fam.name;
      char name[32];
      std::snprintf(name, sizeof(name), "view_%04d.pcd", v);
      view.file = fam.name + "/" + name;

      ShapeSpec& s = view.spec;
      s.kind = fam.kind;
      s.dimensions = fam.dimensions;
      for (double& d : s.dimensions) d *= uniform(rng, 1.0 - fam.jitter, 1.0 + fam.jitter);
      s.points = spec.points;
      s.noise_sigma = spec.noise_sigma;
      s.seed = rng();

      const double yaw = uniform(rng, 0.0, 2.0 * kPi);
      const double elevation = uniform(rng, spec.min_elevation_deg, spec.max_elevation_deg) * kPi / 180.0;
      Eigen::Isometry3d object = Eigen::Isometry3d::Identity();
      object.linear() = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
      if (spec.partial_views) {
        // Camera on a sphere around the object; the view is stored in the
        // camera frame so the sensor sits at the origin.
        const Point3 eye(spec.camera_distance * std::cos(elevation), 0.0,
                         spec.camera_distance * std::sin(elevation));
        const CameraPose cam = CameraPose::look_at(eye, Point3::Zero());
        Eigen::Isometry3d world_to_cam = Eigen::Isometry3d::Identity();
        world_to_cam.linear() = cam.rotation.transpose();
        world_to_cam.translation() = -cam.rotation.transpose() * cam.translation;
        s.pose = world_to_cam * object;
        s.visible_from = Point3::Zero();
      } else {
        s.pose = object;
        s.pose.translation() = Point3(0.0, 0.0, spec.camera_distance);
      }
      s.validate();
      out.views.push_back(std::move(view));
    }
  }
  if (spec.assign_contexts) {
    std::vector<std::string> names;
    for (const auto& f : spec.categories) names.push_back(f.name);
    Rng rng(mix_seed(spec.seed, 0xC0473A7ULL));
    std::shuffle(names.begin(), names.end(), rng);
    const std::size_t in_a = (names.size() + 1) / 2;
    for (std::size_t i = 0; i < names.size(); ++i) out.contexts[names[i]] = i < in_a ? 'A' : 'B';
  }
  return out;
}

GeneratedDataset generate_dataset(const DatasetSpec& spec, const std::filesystem::path& root) {
  GeneratedDataset plan = plan_dataset(spec);
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  if (ec) throw IoError("cannot create '" + root.string() + "': " + ec.message());
  for (const auto& fam : spec.categories) {
    std::filesystem::create_directories(root / fam.name, ec);
    if (ec) throw IoError("cannot create '" + (root / fam.name).string() + "': " + ec.message());
  }
  for (const auto& view : plan.views) save_pcd(root / view.file, generate_view(view.spec));
  write_text_file(root / "manifest.json", dump_json(manifest_json(plan)) + "\n");
  return plan;
}

Eigen::Isometry3d on_table_pose(const ShapeSpec& spec, const TableSpec& table, double x, double y,
                                double yaw) {
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.linear() = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  pose.translation() = Point3(x, y, table.height + spec.half_height());
  return pose;
}

Scene generate_scene(const std::vector<ShapeSpec>& objects, const TableSpec& table,
                     std::uint64_t seed) {
  if (!(table.size_x > 0 && table.size_y > 0 && table.height > 0))
    throw InvalidArgument("table extents must be positive");
  if (table.points < 3) throw InvalidArgument("table needs at least 3 points");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, table.noise_sigma > 0 ? table.noise_sigma : 1.0);
  const auto jitter = [&] { return table.noise_sigma > 0 ? noise(rng) : 0.0; };

  Scene scene;
  const auto add = [&](const Point3& p, int label) {
    scene.cloud.push_back(p);
    scene.labels.push_back(label);
  };
  for (int i = 0; i < table.points; ++i)
    add({uniform(rng, -table.size_x / 2, table.size_x / 2),
         uniform(rng, -table.size_y / 2, table.size_y / 2), table.height + jitter()},
        0);
  for (std::size_t k = 0; k < objects.size(); ++k) {
    ShapeSpec s = objects[k];
    s.seed = mix_seed(seed, s.seed + k);
    for (const auto& p : generate_view(s).points) add(p, static_cast<int>(k) + 1);
  }
  // Floor clutter outside the table footprint.
  const double fx = table.size_x, fy = table.size_y;
  for (int placed = 0; placed < table.floor_clutter;) {
    const Point3 p(uniform(rng, -fx, fx), uniform(rng, -fy, fy), jitter());
    if (std::abs(p.x()) <= fx / 2 && std::abs(p.y()) <= fy / 2) continue;
    add(p, -1);
    ++placed;
  }
  for (int i = 0; i < table.outliers; ++i)
    add({uniform(rng, -fx, fx), uniform(rng, -fy, fy), uniform(rng, 0.0, table.height + 0.5)}, -1);
  return scene;
}

}  // namespace openrec
