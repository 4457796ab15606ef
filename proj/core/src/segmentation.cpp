#include "openrec/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "openrec/kdtree.hpp"

namespace openrec {

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

Eigen::Vector3d canonical_sign(const Eigen::Vector3d& n) {
  for (int axis : {2, 1, 0}) {
    if (n(axis) > 0) return n;
    if (n(axis) < 0) return -n;
  }
  return n;
}

}  // namespace

Plane ransac_plane(const PointCloud& scene, double tau, int iterations, std::uint64_t seed) {
  if (scene.size() < 3) throw InvalidArgument("ransac_plane: need at least 3 points");
  if (!(tau > 0.0)) throw InvalidArgument("ransac_plane: tau must be positive");
  if (iterations < 1) throw InvalidArgument("ransac_plane: iterations must be >= 1");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, scene.size() - 1);
  const auto& pts = scene.points;

  Eigen::Vector3d best_normal = Eigen::Vector3d::Zero();
  double best_d = 0.0;
  std::size_t best_count = 0;
  bool found = false;

  for (int it = 0; it < iterations; ++it) {
    const std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    std::size_t c = pick(rng);
    if (a == b || a == c || b == c) continue;
    const Eigen::Vector3d cross = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
    const double scale = (pts[b] - pts[a]).norm() * (pts[c] - pts[a]).norm();
    if (!(cross.norm() > 1e-12 * scale) || scale == 0.0) continue;

    const Eigen::Vector3d normal = cross.normalized();
    const double d = -normal.dot(pts[a]);
    std::size_t count = 0;
    for (const auto& p : pts)
      if (std::abs(normal.dot(p) + d) < tau) ++count;
    if (!found || count > best_count) {
      found = true;
      best_count = count;
      best_normal = normal;
      best_d = d;
    }
  }
  if (!found) throw DegenerateInput("no plane found: every sample was degenerate");

  // Least-squares refit on the consensus set, then re-select inliers.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (std::abs(best_normal.dot(pts[i]) + best_d) < tau) members.push_back(i);
    if (members.size() < 3) break;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t i : members) mean += pts[i];
    mean /= static_cast<double>(members.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t i : members) cov += (pts[i] - mean) * (pts[i] - mean).transpose();
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
    const Eigen::Vector3d normal = es.eigenvectors().col(0);
    if (!normal.allFinite()) break;
    best_normal = normal.dot(best_normal) < 0 ? Eigen::Vector3d(-normal) : normal;
    best_d = -best_normal.dot(mean);
  }

  Plane plane;
  plane.normal = canonical_sign(best_normal);
  plane.d = plane.normal.dot(best_normal) > 0 ? best_d : -best_d;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (std::abs(plane.signed_distance(pts[i])) < tau) plane.inliers.push_back(i);
  return plane;
}

bool PlaneHull::contains(const Eigen::Vector2d& q) const {
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = vertices[i];
    const Eigen::Vector2d& b = vertices[(i + 1) % n];
    if (cross2(b - a, q - a) < -1e-9) return false;
  }
  return n >= 3;
}

double PlaneHull::boundary_distance(const Eigen::Vector2d& q) const {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = vertices[i];
    const Eigen::Vector2d& b = vertices[(i + 1) % n];
    const Eigen::Vector2d ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (a + t * ab - q).norm());
  }
  return best;
}

PlaneHull plane_hull(const PointCloud& scene, const Plane& plane) {
  if (plane.inliers.size() < 3) throw InvalidArgument("plane_hull: fewer than 3 inliers");

  PlaneHull hull;
  const Eigen::Vector3d n = plane.normal.normalized();
  const Eigen::Vector3d helper =
      std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  hull.u = n.cross(helper).normalized();
  hull.v = n.cross(hull.u);
  hull.origin = -plane.d * n;

  std::vector<Eigen::Vector2d> pts;
  pts.reserve(plane.inliers.size());
  for (std::size_t idx : plane.inliers) pts.push_back(hull.project(scene.points.at(idx)));
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });

  // Andrew's monotone chain.
  std::vector<Eigen::Vector2d> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(h[k - 1] - h[k - 2], p - h[k - 2]) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross2(h[k - 1] - h[k - 2], pts[i] - h[k - 2]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k > 0 ? k - 1 : 0);
  if (h.size() < 3) throw InvalidArgument("plane_hull: inliers are collinear");
  hull.vertices = std::move(h);
  return hull;
}

std::vector<std::size_t> extract_prism_indices(const PointCloud& scene, const Plane& plane,
                                               double min_h, double max_h) {
  if (!(min_h < max_h)) throw InvalidArgument("extract_prism: min_h must be < max_h");
  const PlaneHull hull = plane_hull(scene, plane);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Point3& p = scene.points[i];
    const double h = plane.signed_distance(p);
    if (h > min_h && h < max_h && hull.contains(hull.project(p))) out.push_back(i);
  }
  return out;
}

PointCloud extract_prism(const PointCloud& scene, const Plane& plane, double min_h, double max_h) {
  return select(scene, extract_prism_indices(scene, plane, min_h, max_h));
}

PointCloud select(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  PointCloud out;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) {
    if (cloud.has_colors())
      out.push_back(cloud.points.at(i), cloud.colors.at(i));
    else
      out.push_back(cloud.points.at(i));
  }
  return out;
}

std::vector<std::vector<std::size_t>> euclidean_cluster_indices(const PointCloud& cloud,
                                                                double link_dist,
                                                                std::size_t min_pts,
                                                                std::size_t max_pts) {
  if (!(link_dist > 0.0)) throw InvalidArgument("euclidean_cluster: link_dist must be positive");
  std::vector<std::vector<std::size_t>> clusters;
  if (cloud.empty()) return clusters;

  const KdTree tree(cloud.points);
  std::vector<char> visited(cloud.size(), 0);
  std::vector<std::size_t> frontier;
  for (std::size_t seed = 0; seed < cloud.size(); ++seed) {
    if (visited[seed]) continue;
    std::vector<std::size_t> members{seed};
    visited[seed] = 1;
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const std::size_t cur = frontier.back();
      frontier.pop_back();
      for (std::size_t nb : tree.radius(cloud.points[cur], link_dist)) {
        if (visited[nb]) continue;
        visited[nb] = 1;
        members.push_back(nb);
        frontier.push_back(nb);
      }
    }
    if (members.size() < min_pts || members.size() > max_pts) continue;
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  return clusters;
}

std::vector<PointCloud> euclidean_cluster(const PointCloud& cloud, double link_dist,
                                          std::size_t min_pts, std::size_t max_pts) {
  std::vector<PointCloud> out;
  for (const auto& idx : euclidean_cluster_indices(cloud, link_dist, min_pts, max_pts))
    out.push_back(select(cloud, idx));
  return out;
}

bool detection_expression(const CandidateFlags& f) {
  return f.on_table && f.tracked && f.size_ok && !(f.instructor || f.robot || f.near_edge);
}

bool exploration_expression(const CandidateFlags& f) {
  return f.on_table && f.tracked && f.is_key_view && !(f.instructor || f.robot);
}

Detection detect(const PointCloud& scene, const DetectionParams& params) {
  Detection result;
  result.table = ransac_plane(scene, params.plane_tau, params.plane_iterations, params.seed);
  if (result.table.normal.dot(params.up) < 0) result.table = result.table.flipped();
  if (params.table_link > 0.0) {
    const auto patches = euclidean_cluster_indices(select(scene, result.table.inliers), params.table_link, 3,
                                                   std::numeric_limits<std::size_t>::max());
    if (!patches.empty()) {
      const auto& largest = *std::max_element(
          patches.begin(), patches.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
      std::vector<std::size_t> kept;
      for (std::size_t i : largest) kept.push_back(result.table.inliers[i]);
      result.table.inliers = std::move(kept);
    }
  }
  result.hull = plane_hull(scene, result.table);

  const PointCloud prism =
      extract_prism(scene, result.table, params.prism_min_h, params.prism_max_h);
  const auto size_of = [](const PointCloud& c) { return aabb(c).largest_edge(); };

  std::vector<PointCloud> clusters;
  for (auto& cluster :
       euclidean_cluster(prism, params.link_dist, params.min_pts, params.max_pts)) {
    if (size_of(cluster) > params.max_size && params.refine_link_ratio > 0.0) {
      auto parts = euclidean_cluster(cluster, params.link_dist * params.refine_link_ratio,
                                     params.min_pts, params.max_pts);
      if (parts.size() > 1) {
        for (auto& part : parts) clusters.push_back(std::move(part));
        continue;
      }
    }
    clusters.push_back(std::move(cluster));
  }

  int track_id = params.first_track_id;
  for (auto& cluster : clusters) {
    ObjectCandidate cand;
    cand.track_id = track_id++;
    const double size = size_of(cluster);
    cand.flags.on_table = true;
    cand.flags.size_ok = size >= params.min_size && size <= params.max_size;
    const Eigen::Vector2d c2 = result.hull.project(centroid(cluster));
    cand.flags.near_edge =
        !result.hull.contains(c2) || result.hull.boundary_distance(c2) < params.edge_margin;
    cand.cloud = std::move(cluster);
    if (detection_expression(cand.flags)) result.accepted.push_back(cand);
    result.all.push_back(std::move(cand));
  }
  return result;
}

std::vector<ObjectCandidate> detect_objects(const PointCloud& scene,
                                            const DetectionParams& params) {
  return detect(scene, params).accepted;
}

}  // namespace openrec
