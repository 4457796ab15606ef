#include "openrec/nbv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include <json.hpp>

#include "openrec/segmentation.hpp"

namespace openrec {

void CameraPose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite())
    throw InvalidArgument("camera pose: non-finite entries");
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw InvalidArgument("camera pose: rotation must be orthonormal with det +1");
}

CameraPose CameraPose::look_at(const Point3& eye, const Point3& target, const Eigen::Vector3d& up) {
  const Eigen::Vector3d z = (target - eye).normalized();
  Eigen::Vector3d x = z.cross(up);
  if (x.norm() < 1e-12) x = z.cross(Eigen::Vector3d::UnitX());
  if (x.norm() < 1e-12) x = z.cross(Eigen::Vector3d::UnitY());
  x.normalize();
  const Eigen::Vector3d y = z.cross(x);
  CameraPose pose;
  pose.rotation.col(0) = x;
  pose.rotation.col(1) = y;
  pose.rotation.col(2) = z;
  pose.translation = eye;
  return pose;
}

SegmentedScene SegmentedScene::from_clusters(const std::vector<PointCloud>& clusters) {
  std::vector<double> areas;
  for (const auto& c : clusters) areas.push_back(static_cast<double>(c.size()));
  return from_areas(std::move(areas));
}

SegmentedScene SegmentedScene::from_areas(std::vector<double> areas) {
  SegmentedScene s;
  for (double a : areas) s.total_area += a;
  s.areas = std::move(areas);
  return s;
}

double viewpoint_entropy(const SegmentedScene& scene) {
  if (scene.areas.empty()) throw InvalidArgument("viewpoint_entropy: no clusters");
  double sum = 0.0;
  for (double a : scene.areas) {
    if (!(a > 0.0)) throw InvalidArgument("viewpoint_entropy: cluster with zero area");
    sum += a;
  }
  if (scene.total_area < sum * (1.0 - 1e-12))
    throw InvalidArgument("viewpoint_entropy: total area below the cluster sum");
  double h = 0.0;
  for (double a : scene.areas) {
    const double p = a / scene.total_area;
    h -= p * std::log(p);
  }
  return h;
}

std::vector<std::size_t> render_virtual_indices(const PointCloud& world, const CameraPose& pose,
                                                const RenderParams& params) {
  if (params.resolution < 1) throw InvalidArgument("render: resolution must be >= 1");
  pose.validate();

  std::vector<Point3> cam;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < world.size(); ++i) {
    const Point3 p = pose.to_camera(world.points[i]);
    if (p.z() > 0.0 && p.allFinite()) {
      cam.push_back(p);
      idx.push_back(i);
    }
  }
  if (cam.empty()) return {};

  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (const auto& p : cam) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  double side = params.extent.value_or(std::max(x1 - x0, y1 - y0) * (1.0 + 2.0 * params.margin));
  if (!(side > 0.0)) side = 1e-6;
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const int res = params.resolution;

  std::vector<std::size_t> best(static_cast<std::size_t>(res) * res, cam.size());
  for (std::size_t j = 0; j < cam.size(); ++j) {
    const double u = (cam[j].x() - cx) / side + 0.5;
    const double v = (cam[j].y() - cy) / side + 0.5;
    if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) continue;
    const auto px = static_cast<std::size_t>(std::min(res - 1, static_cast<int>(u * res)));
    const auto py = static_cast<std::size_t>(std::min(res - 1, static_cast<int>(v * res)));
    std::size_t& slot = best[py * static_cast<std::size_t>(res) + px];
    if (slot == cam.size() || cam[j].z() < cam[slot].z()) slot = j;
  }
  std::vector<std::size_t> out;
  for (std::size_t slot : best)
    if (slot != cam.size()) out.push_back(idx[slot]);
  std::sort(out.begin(), out.end());
  return out;
}

PointCloud render_virtual(const PointCloud& world, const CameraPose& pose,
                          const RenderParams& params) {
  return select(world, render_virtual_indices(world, pose, params));
}

double gaussian_weight(const CameraPose& v, const CameraPose& current, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("gaussian_weight: sigma must be positive");
  const double d2 = (v.translation - current.translation).squaredNorm();
  return std::exp(-d2 / (2.0 * sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double weighted_entropy(double H, const CameraPose& v, const CameraPose& current, double sigma) {
  return H * gaussian_weight(v, current, sigma);
}

std::vector<double> selection_probabilities(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("selection: weights must be finite and >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw InvalidArgument("selection: all weights are zero");
  std::vector<double> p;
  p.reserve(weights.size());
  for (double w : weights) p.push_back(w / total);
  return p;
}

std::size_t select_next_view(std::span<const double> weights, std::mt19937_64& rng) {
  const auto p = selection_probabilities(weights);
  std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
  return dist(rng);
}

std::size_t select_next_view(std::span<const double> weights, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return select_next_view(weights, rng);
}

std::vector<CandidateScore> evaluate_candidates(const PointCloud& world,
                                                std::span<const CameraPose> candidates,
                                                const CameraPose& current, const NbvParams& params,
                                                std::span<const int> labels) {
  if (world.empty()) throw InvalidArgument("nbv: empty world cloud");
  if (!labels.empty() && labels.size() != world.size())
    throw InvalidArgument("nbv: one label per world point required");

  std::vector<CandidateScore> out;
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto visible = render_virtual_indices(world, candidates[i], params.render);
    std::vector<double> areas;
    if (!labels.empty()) {
      std::map<int, double> counts;
      for (std::size_t j : visible)
        if (labels[j] >= 0) counts[labels[j]] += 1.0;
      for (const auto& [label, n] : counts) areas.push_back(n);
    } else {
      const PointCloud seen = select(world, visible);
      for (const auto& c : euclidean_cluster_indices(seen, params.cluster_link, params.cluster_min_pts,
                                                     std::numeric_limits<std::size_t>::max()))
        areas.push_back(static_cast<double>(c.size()));
    }
    CandidateScore s;
    s.index = i;
    s.visible_points = visible.size();
    s.clusters = areas.size();
    if (!areas.empty()) {
      SegmentedScene scene;
      scene.areas = areas;
      scene.total_area = static_cast<double>(visible.size());
      s.entropy = viewpoint_entropy(scene);
    }
    s.weighted = weighted_entropy(s.entropy, candidates[i], current, params.sigma);
    total += s.weighted;
    out.push_back(s);
  }
  if (total > 0.0)
    for (auto& s : out) s.probability = s.weighted / total;
  return out;
}

std::vector<CameraPose> parse_poses_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("poses: ") + e.what(), 0);
  }
  if (!j.is_array()) throw ParseError("poses: expected a JSON list", 0);
  std::vector<CameraPose> poses;
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("rotation") || !item.contains("translation"))
      throw ParseError("poses: each entry needs rotation and translation", 0);
    const auto& r = item.at("rotation");
    const auto& t = item.at("translation");
    if (!r.is_array() || r.size() != 9 || !t.is_array() || t.size() != 3)
      throw ParseError("poses: rotation needs 9 numbers and translation 3", 0);
    CameraPose pose;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) pose.rotation(a, b) = r.at(static_cast<std::size_t>(3 * a + b)).get<double>();
      pose.translation(a) = t.at(static_cast<std::size_t>(a)).get<double>();
    }
    pose.validate();
    poses.push_back(pose);
  }
  return poses;
}

}  // namespace openrec
