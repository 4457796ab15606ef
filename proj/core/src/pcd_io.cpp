#include "openrec/pcd_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace openrec {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double parse_double(std::string_view token, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("non-numeric field '" + std::string(token) + "'", line);
  return value;
}

Rgb parse_rgb(std::string_view token, char type, std::size_t line) {
  std::uint32_t packed = 0;
  if (type == 'F') {
    packed = std::bit_cast<std::uint32_t>(static_cast<float>(parse_double(token, line)));
  } else {
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), packed);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      // PCL writes packed rgb as a float when TYPE is absent or F.
      packed = std::bit_cast<std::uint32_t>(static_cast<float>(parse_double(token, line)));
    }
  }
  return Rgb{static_cast<std::uint8_t>((packed >> 16) & 0xFF),
             static_cast<std::uint8_t>((packed >> 8) & 0xFF),
             static_cast<std::uint8_t>(packed & 0xFF)};
}

}  // namespace

PointCloud read_pcd(std::istream& in) {
  std::vector<std::string> fields;
  std::vector<char> types;
  long long declared_points = -1;
  bool data_seen = false;
  std::size_t line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    const std::string_view key = tokens.front();
    if (key == "FIELDS") {
      fields.assign(tokens.begin() + 1, tokens.end());
    } else if (key == "TYPE") {
      for (auto it = tokens.begin() + 1; it != tokens.end(); ++it) types.push_back(it->front());
    } else if (key == "POINTS") {
      if (tokens.size() != 2) throw ParseError("malformed POINTS line", line_no);
      const double v = parse_double(tokens[1], line_no);
      if (v < 0 || v != std::floor(v)) throw ParseError("malformed POINTS count", line_no);
      declared_points = static_cast<long long>(v);
    } else if (key == "DATA") {
      if (tokens.size() != 2 || tokens[1] != "ascii")
        throw ParseError("only DATA ascii is supported", line_no);
      data_seen = true;
      break;
    } else if (key == "VERSION" || key == "SIZE" || key == "COUNT" || key == "WIDTH" ||
               key == "HEIGHT" || key == "VIEWPOINT") {
      continue;
    } else {
      throw ParseError("unknown header line '" + std::string(key) + "'", line_no);
    }
  }
  if (!data_seen) throw ParseError("missing DATA ascii line", line_no);
  if (declared_points < 0) throw ParseError("missing POINTS line", 0);

  int ix = -1, iy = -1, iz = -1, irgb = -1;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (fields[i] == "x") ix = idx;
    else if (fields[i] == "y") iy = idx;
    else if (fields[i] == "z") iz = idx;
    else if (fields[i] == "rgb" || fields[i] == "rgba") irgb = idx;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError("FIELDS must contain x y z", 0);
  const char rgb_type = (irgb >= 0 && static_cast<std::size_t>(irgb) < types.size())
                            ? types[static_cast<std::size_t>(irgb)]
                            : '?';

  PointCloud cloud;
  long long rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != fields.size())
      throw ParseError("expected " + std::to_string(fields.size()) + " fields, got " +
                           std::to_string(tokens.size()),
                       line_no);
    ++rows;
    const Point3 p(parse_double(tokens[static_cast<std::size_t>(ix)], line_no),
                   parse_double(tokens[static_cast<std::size_t>(iy)], line_no),
                   parse_double(tokens[static_cast<std::size_t>(iz)], line_no));
    Rgb color;
    if (irgb >= 0) color = parse_rgb(tokens[static_cast<std::size_t>(irgb)], rgb_type, line_no);
    if (!p.allFinite()) continue;
    if (irgb >= 0)
      cloud.push_back(p, color);
    else
      cloud.push_back(p);
  }
  if (rows != declared_points)
    throw ParseError("POINTS declares " + std::to_string(declared_points) + " rows, found " +
                         std::to_string(rows),
                     line_no);
  return cloud;
}

PointCloud load_pcd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_pcd(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

void write_pcd(std::ostream& out, const PointCloud& cloud) {
  const bool rgb = cloud.has_colors();
  out << "# .PCD v0.7 - Point Cloud Data file format\n";
  out << "VERSION 0.7\n";
  out << (rgb ? "FIELDS x y z rgb\n" : "FIELDS x y z\n");
  out << (rgb ? "SIZE 4 4 4 4\n" : "SIZE 4 4 4\n");
  out << (rgb ? "TYPE F F F U\n" : "TYPE F F F\n");
  out << (rgb ? "COUNT 1 1 1 1\n" : "COUNT 1 1 1\n");
  out << "WIDTH " << cloud.size() << "\nHEIGHT 1\n";
  out << "VIEWPOINT 0 0 0 1 0 0 0\n";
  out << "POINTS " << cloud.size() << "\nDATA ascii\n";

  std::ostringstream row;
  row.precision(6);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    row.str({});
    const Point3& p = cloud.points[i];
    row << p.x() << ' ' << p.y() << ' ' << p.z();
    if (rgb) {
      const Rgb& c = cloud.colors[i];
      row << ' ' << ((std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b);
    }
    out << row.str() << '\n';
  }
}

void save_pcd(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_pcd(out, cloud);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace openrec
