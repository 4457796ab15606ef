#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "openrec/pointcloud.hpp"

namespace openrec {

/// Static 3D k-d tree over a borrowed point array. The points must outlive
/// the tree and stay unmodified.
class KdTree {
 public:
  explicit KdTree(std::span<const Point3> points);

  /// Indices of the k nearest points (fewer if the tree is smaller), nearest
  /// first; equal distances ordered by index.
  std::vector<std::size_t> knn(const Point3& query, std::size_t k) const;

  /// Indices of all points with squared distance < radius^2 (strict), sorted
  /// ascending by index.
  std::vector<std::size_t> radius(const Point3& query, double radius) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    std::size_t begin = 0;  // range into order_
    std::size_t end = 0;
    int axis = -1;          // -1 = leaf
    double split = 0.0;
    std::size_t left = 0;   // child node ids
    std::size_t right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);

  std::span<const Point3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace openrec
