#pragma once

#include <filesystem>
#include <iosfwd>

#include "openrec/pointcloud.hpp"

namespace openrec {

/// Reads the ASCII PCD subset: `FIELDS x y z [rgb]`, `POINTS <m>`, `DATA ascii`.
/// Other standard header lines (VERSION, SIZE, TYPE, COUNT, WIDTH, HEIGHT,
/// VIEWPOINT) are accepted. Rows containing NaN are dropped; order of the
/// remaining rows is preserved. Errors carry the offending line number.
PointCloud read_pcd(std::istream& in);
PointCloud load_pcd(const std::filesystem::path& path);

/// Writes the same subset with 6 significant digits per coordinate; `rgb` is
/// emitted as a packed unsigned integer when the cloud has colors.
void write_pcd(std::ostream& out, const PointCloud& cloud);
void save_pcd(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace openrec
