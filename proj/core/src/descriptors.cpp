#include "openrec/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "openrec/kdtree.hpp"

namespace openrec {

namespace {

std::pair<double, double> project(const Point3& p, ProjectionPlane plane) {
  switch (plane) {
    case ProjectionPlane::XoZ: return {p.x(), p.z()};
    case ProjectionPlane::XoY: return {p.x(), p.y()};
    case ProjectionPlane::YoZ: return {p.y(), p.z()};
  }
  return {0.0, 0.0};
}

void require_pmf(std::span<const double> m) {
  for (double v : m)
    if (v < 0.0 || !std::isfinite(v)) throw InvalidArgument("distribution has a negative entry");
}

}  // namespace

std::string_view to_string(ProjectionPlane plane) {
  switch (plane) {
    case ProjectionPlane::XoZ: return "XoZ";
    case ProjectionPlane::XoY: return "XoY";
    case ProjectionPlane::YoZ: return "YoZ";
  }
  return "?";
}

Eigen::MatrixXd project_distribution(const PointCloud& cloud_in_frame, ProjectionPlane plane,
                                     double l, int n, double epsilon) {
  if (cloud_in_frame.empty()) throw InvalidArgument("project_distribution: empty cloud");
  if (n < 2) throw InvalidArgument("project_distribution: n must be >= 2");
  if (!(l > 0.0)) throw InvalidArgument("project_distribution: l must be positive");

  const double half = l / 2.0;
  const double slack = 1e-12 * l;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : cloud_in_frame.points) {
    const auto [alpha, beta] = project(p, plane);
    if (std::abs(alpha) > half + slack || std::abs(beta) > half + slack)
      throw InvalidArgument("project_distribution: l not enclosing the projected points");
    const int r = std::clamp(static_cast<int>(std::floor(n * (alpha + half) / (l * (1.0 + epsilon)))), 0, n - 1);
    const int c = std::clamp(static_cast<int>(std::floor(n * (beta + half) / (l * (1.0 + epsilon)))), 0, n - 1);
    m(r, c) += 1.0;
  }
  return m / static_cast<double>(cloud_in_frame.size());
}

std::vector<double> flatten_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

double projection_entropy(std::span<const double> m) {
  require_pmf(m);
  double h = 0.0;
  for (double v : m)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

double projection_variance(std::span<const double> m) {
  require_pmf(m);
  double mean = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) mean += static_cast<double>(i + 1) * m[i];
  double var = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double d = static_cast<double>(i + 1) - mean;
    var += d * d * m[i];
  }
  return var;
}

GoodDescriptor compute_good(const PointCloud& cloud, const GoodParams& params) {
  if (params.n < 2) throw InvalidArgument("compute_good: n must be >= 2");

  GoodDescriptor out;
  out.n = params.n;
  out.frame = compute_reference_frame(cloud, params.sign_threshold);
  const PointCloud local = out.frame.to_local(cloud);

  double reach = 0.0;
  for (const auto& p : local.points) reach = std::max(reach, p.cwiseAbs().maxCoeff());
  out.side_length = 2.0 * reach;

  struct Block {
    ProjectionPlane plane;
    std::vector<double> values;
    double entropy;
    double variance;
  };
  std::array<Block, 3> blocks;
  for (int i = 0; i < 3; ++i) {
    const auto plane = static_cast<ProjectionPlane>(i);
    auto values = flatten_row_major(
        project_distribution(local, plane, out.side_length, params.n, params.epsilon));
    const double h = projection_entropy(values);
    const double v = projection_variance(values);
    blocks[static_cast<std::size_t>(i)] = Block{plane, std::move(values), h, v};
  }

  // Highest entropy first; planes are already in precedence order, so a
  // strict comparison keeps the earlier plane on near-ties.
  std::size_t first = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (blocks[i].entropy > blocks[first].entropy + 1e-9) first = i;
  std::array<std::size_t, 2> rest{};
  for (std::size_t i = 0, k = 0; i < 3; ++i)
    if (i != first) rest[k++] = i;
  if (blocks[rest[1]].variance < blocks[rest[0]].variance - 1e-9) std::swap(rest[0], rest[1]);

  const std::array<std::size_t, 3> order{first, rest[0], rest[1]};
  out.bins.reserve(3 * static_cast<std::size_t>(params.n * params.n));
  for (std::size_t k = 0; k < 3; ++k) {
    const Block& b = blocks[order[k]];
    out.order[k] = b.plane;
    out.bins.insert(out.bins.end(), b.values.begin(), b.values.end());
  }
  return out;
}

Eigen::VectorXd SpinImage::flattened() const {
  Eigen::VectorXd v(histogram.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < histogram.rows(); ++r)
    for (Eigen::Index c = 0; c < histogram.cols(); ++c) v(k++) = histogram(r, c);
  return v;
}

std::vector<Eigen::VectorXd> FeatureSet::vectors() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(spin_images.size());
  for (const auto& s : spin_images) out.push_back(s.flattened());
  return out;
}

std::vector<std::size_t> extract_keypoint_indices(const PointCloud& cloud, double voxel) {
  if (cloud.empty()) throw InvalidArgument("extract_keypoints: empty cloud");
  if (!(voxel > 0.0)) throw InvalidArgument("extract_keypoints: voxel must be positive");

  const Point3 anchor = aabb(cloud).min;
  struct Best {
    std::size_t index;
    double dist2;
  };
  std::map<std::tuple<int, int, int>, Best> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3i idx = voxel_index(cloud.points[i], anchor, voxel);
    const Point3 center = anchor + (idx.cast<double>().array() + 0.5).matrix() * voxel;
    const double d2 = (cloud.points[i] - center).squaredNorm();
    auto [it, inserted] = cells.try_emplace({idx.x(), idx.y(), idx.z()}, Best{i, d2});
    if (!inserted && d2 < it->second.dist2) it->second = Best{i, d2};
  }
  std::vector<std::size_t> out;
  out.reserve(cells.size());
  for (const auto& [key, best] : cells) out.push_back(best.index);
  return out;
}

std::vector<Point3> extract_keypoints(const PointCloud& cloud, double voxel) {
  std::vector<Point3> out;
  for (std::size_t i : extract_keypoint_indices(cloud, voxel)) out.push_back(cloud.points[i]);
  return out;
}

std::vector<Eigen::Vector3d> estimate_normals(const PointCloud& cloud, int k,
                                              const Point3& viewpoint) {
  if (k < 3) throw InvalidArgument("estimate_normals: k must be >= 3");
  std::vector<Eigen::Vector3d> normals(cloud.size(), Eigen::Vector3d::UnitZ());
  if (cloud.size() < 3) return normals;

  const KdTree tree(cloud.points);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto nbrs = tree.knn(cloud.points[i], static_cast<std::size_t>(k));
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (std::size_t j : nbrs) mean += cloud.points[j];
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (std::size_t j : nbrs) {
      const Eigen::Vector3d d = cloud.points[j] - mean;
      cov.noalias() += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    Eigen::Vector3d n = solver.eigenvectors().col(0);  // smallest eigenvalue
    if (n.dot(viewpoint - cloud.points[i]) < 0) n = -n;
    normals[i] = n.normalized();
  }
  return normals;
}

SpinCoordinates spin_coordinates(const Point3& p, const Eigen::Vector3d& n, const Point3& x) {
  const Eigen::Vector3d d = x - p;
  const double beta = n.dot(d);
  const double alpha = std::sqrt(std::max(0.0, d.squaredNorm() - beta * beta));
  return {alpha, beta};
}

SpinImage compute_spin_image(const PointCloud& cloud, std::span<const Eigen::Vector3d> normals,
                             const Point3& keypoint, const Eigen::Vector3d& normal,
                             const SpinImageParams& params) {
  if (params.image_width < 1) throw InvalidArgument("spin image: IW must be >= 1");
  if (!(params.support_length > 0.0)) throw InvalidArgument("spin image: SL must be positive");
  if (normals.size() != cloud.size())
    throw InvalidArgument("spin image: one normal per point required");
  if (std::abs(normal.norm() - 1.0) > 1e-6)
    throw InvalidArgument("spin image: keypoint normal must be unit length");

  const int iw = params.image_width;
  const double sl = params.support_length;
  const double cos_limit = std::cos(params.support_angle_deg * std::numbers::pi / 180.0);

  SpinImage img;
  img.keypoint = keypoint;
  img.normal = normal;
  img.histogram = Eigen::MatrixXd::Zero(iw + 1, 2 * iw + 1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto [alpha, beta] = spin_coordinates(keypoint, normal, cloud.points[i]);
    if (alpha > sl || std::abs(beta) > sl) continue;
    if (normals[i].dot(normal) < cos_limit - 1e-12) continue;
    const int row = std::clamp(static_cast<int>(std::floor(alpha * iw / sl)), 0, iw);
    const int col = std::clamp(static_cast<int>(std::floor((beta + sl) * iw / sl)), 0, 2 * iw);
    img.histogram(row, col) += 1.0;
  }
  return img;
}

FeatureSet compute_feature_set(const PointCloud& cloud, const SpinImageParams& params) {
  if (cloud.empty()) throw InvalidArgument("compute_feature_set: empty cloud");
  const auto normals = estimate_normals(cloud, params.normal_k);
  FeatureSet set;
  for (std::size_t k : extract_keypoint_indices(cloud, params.voxel))
    set.spin_images.push_back(
        compute_spin_image(cloud, normals, cloud.points[k], normals[k], params));
  return set;
}

}  // namespace openrec
