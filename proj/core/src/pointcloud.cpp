#include "openrec/pointcloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>

#include <Eigen/Eigenvalues>

namespace openrec {

namespace {

bool finite(const Point3& p) { return p.allFinite(); }

void require_nonempty(const PointCloud& cloud, const char* op) {
  if (cloud.empty()) throw InvalidArgument(std::string(op) + ": empty cloud");
}

using VoxelKey = std::tuple<int, int, int>;

VoxelKey key_of(const Eigen::Vector3i& idx) { return {idx.x(), idx.y(), idx.z()}; }

}  // namespace

PointCloud ReferenceFrame::to_local(const PointCloud& cloud) const {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(to_local(p));
  out.colors = cloud.colors;
  return out;
}

PointCloud transform(const PointCloud& cloud, const Eigen::Isometry3d& motion) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(motion * p);
  out.colors = cloud.colors;
  return out;
}

PointCloud remove_non_finite(const PointCloud& cloud) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!finite(cloud.points[i])) continue;
    if (cloud.has_colors())
      out.push_back(cloud.points[i], cloud.colors[i]);
    else
      out.push_back(cloud.points[i]);
  }
  return out;
}

PointCloud crop_cube(const PointCloud& cloud, const Point3& center, double side) {
  if (!(side > 0.0)) throw InvalidArgument("crop_cube: side must be positive");
  const double half = side / 2.0;
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    if (!finite(p)) continue;
    if (((p - center).cwiseAbs().array() <= half).all()) {
      if (cloud.has_colors())
        out.push_back(p, cloud.colors[i]);
      else
        out.push_back(p);
    }
  }
  return out;
}

Eigen::Vector3i voxel_index(const Point3& p, const Point3& anchor, double voxel) {
  const Eigen::Vector3d scaled = (p - anchor) / voxel;
  return {static_cast<int>(std::floor(scaled.x())), static_cast<int>(std::floor(scaled.y())),
          static_cast<int>(std::floor(scaled.z()))};
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (!(voxel > 0.0)) throw InvalidArgument("voxel_downsample: voxel must be positive");
  require_nonempty(cloud, "voxel_downsample");

  struct Accum {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    std::size_t count = 0;
  };
  const Point3 anchor = aabb(cloud).min;
  std::map<VoxelKey, Accum> cells;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto& cell = cells[key_of(voxel_index(cloud.points[i], anchor, voxel))];
    cell.sum += cloud.points[i];
    if (cloud.has_colors()) {
      const Rgb& c = cloud.colors[i];
      cell.color += Eigen::Vector3d(c.r, c.g, c.b);
    }
    ++cell.count;
  }

  PointCloud out;
  out.points.reserve(cells.size());
  for (const auto& [key, cell] : cells) {
    const double n = static_cast<double>(cell.count);
    if (cloud.has_colors()) {
      const Eigen::Vector3d c = (cell.color / n).array().round();
      out.push_back(cell.sum / n, Rgb{static_cast<std::uint8_t>(c.x()),
                                      static_cast<std::uint8_t>(c.y()),
                                      static_cast<std::uint8_t>(c.z())});
    } else {
      out.push_back(cell.sum / n);
    }
  }
  return out;
}

Point3 centroid(const PointCloud& cloud) {
  require_nonempty(cloud, "centroid");
  Point3 sum = Point3::Zero();
  for (const auto& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

Eigen::Matrix3d covariance(const PointCloud& cloud, const Point3& center) {
  require_nonempty(cloud, "covariance");
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d d = p - center;
    c.noalias() += d * d.transpose();
  }
  return c / static_cast<double>(cloud.size());
}

BoundingBox aabb(const PointCloud& cloud) {
  require_nonempty(cloud, "aabb");
  BoundingBox box{cloud.points.front(), cloud.points.front()};
  for (const auto& p : cloud.points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

BoundingBox aabb_in_frame(const PointCloud& cloud, const ReferenceFrame& frame) {
  require_nonempty(cloud, "aabb_in_frame");
  const Point3 first = frame.to_local(cloud.points.front());
  BoundingBox box{first, first};
  for (const auto& p : cloud.points) {
    const Point3 q = frame.to_local(p);
    box.min = box.min.cwiseMin(q);
    box.max = box.max.cwiseMax(q);
  }
  return box;
}

EigenDecomposition sorted_eigen(const Eigen::Matrix3d& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(symmetric);
  if (solver.info() != Eigen::Success) throw DegenerateInput("eigen-decomposition failed");

  std::array<int, 3> order{0, 1, 2};
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(values(a) - values(b)) >= 1e-12) return values(a) > values(b);
    const Eigen::Vector3d va = vectors.col(a);
    const Eigen::Vector3d vb = vectors.col(b);
    return std::lexicographical_compare(vb.data(), vb.data() + 3, va.data(), va.data() + 3);
  });

  EigenDecomposition out;
  for (int i = 0; i < 3; ++i) {
    out.values(i) = values(order[i]);
    out.vectors.col(i) = vectors.col(order[i]);
  }
  return out;
}

ReferenceFrame compute_reference_frame(const PointCloud& cloud, double sign_threshold) {
  if (cloud.size() < 3) throw DegenerateInput("degenerate cloud: fewer than 3 points");

  const Point3 center = centroid(cloud);
  const EigenDecomposition eig = sorted_eigen(covariance(cloud, center));
  const double l1 = eig.values(0);
  const double l2 = eig.values(1);
  const double l3 = eig.values(2);
  if (!(l1 > 1e-18) || l2 <= 1e-12 * l1)
    throw DegenerateInput("degenerate cloud: points are coincident or collinear");
  if (l1 - l3 <= 1e-9 * l1)
    throw DegenerateInput("degenerate cloud: isotropic covariance has no dominant axis");

  const Eigen::Vector3d v1 = eig.vectors.col(0).normalized();
  const Eigen::Vector3d v2 = (eig.vectors.col(1) - eig.vectors.col(1).dot(v1) * v1).normalized();

  // Threshold scales with the cloud so the frame is scale-invariant.
  double reach = 0.0;
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d d = p - center;
    reach = std::max({reach, std::abs(d.dot(v1)), std::abs(d.dot(v2))});
  }
  const double t = sign_threshold * reach;

  std::size_t x_pos = 0, x_neg = 0, y_pos = 0, y_neg = 0;
  double x_skew = 0.0, y_skew = 0.0;
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d d = p - center;
    const double x = d.dot(v1);
    const double y = d.dot(v2);
    if (x > t) ++x_pos;
    if (x < -t) ++x_neg;
    if (y > t) ++y_pos;
    if (y < -t) ++y_neg;
    x_skew += x * x * x;
    y_skew += y * y * y;
  }
  // Count ties fall back to the sign of the third moment.
  const auto sign = [](std::size_t pos, std::size_t neg, double skew) {
    if (pos != neg) return pos > neg ? 1.0 : -1.0;
    return skew >= 0.0 ? 1.0 : -1.0;
  };
  const double sx = sign(x_pos, x_neg, x_skew);
  const double sy = sign(y_pos, y_neg, y_skew);

  ReferenceFrame frame;
  frame.origin = center;
  frame.axes.col(0) = sx * v1;
  frame.axes.col(1) = sy * v2;
  frame.axes.col(2) = frame.axes.col(0).cross(frame.axes.col(1));
  return frame;
}

}  // namespace openrec
