#pragma once

// Shared fixtures and independent oracles for the test suites. Nothing here
// calls into the library's math; expected values are computed from scratch.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sparc/geometry.hpp"
#include "sparc/puzzle.hpp"
#include "sparc/session.hpp"

namespace test {

inline std::string source_path(const std::string& rel) { return std::string(SPARC_SOURCE_DIR) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const sparc::puzzle::PieceSet& bedlam() {
  static const sparc::puzzle::PieceSet set = sparc::puzzle::load_piece_set_file(source_path("data/bedlam.txt"));
  return set;
}

inline const sparc::session::SessionConfig& bedlam_config(sparc::Condition c) {
  static const auto s = sparc::session::SessionConfig::make(sparc::Condition::Sparc, bedlam());
  static const auto v = sparc::session::SessionConfig::make(sparc::Condition::Veridical, bedlam());
  return c == sparc::Condition::Sparc ? s : v;
}

inline double dist(sparc::geo::Vec3 a, sparc::geo::Vec3 b) { return sparc::geo::norm(a - b); }

namespace oracle {

using LV = std::array<long double, 3>;

// Rotation about the vertical through `pivot`, counterclockwise seen from
// above (+y toward the viewer): +x turns toward -z.
inline LV yaw_about(LV p, LV pivot, long double deg) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double a = deg * pi / 180.0L;
  const long double c = std::cos(a);
  const long double s = std::sin(a);
  const long double dx = p[0] - pivot[0];
  const long double dz = p[2] - pivot[2];
  return {pivot[0] + c * dx + s * dz, p[1], pivot[2] - s * dx + c * dz};
}

inline LV lv(sparc::geo::Vec3 v) { return {v.x, v.y, v.z}; }
inline sparc::geo::Vec3 vec(LV v) {
  return {static_cast<double>(v[0]), static_cast<double>(v[1]), static_cast<double>(v[2])};
}

inline sparc::geo::Vec3 displayed(sparc::geo::Vec3 q, int seat, sparc::Condition c, sparc::geo::Vec3 center) {
  if (c == sparc::Condition::Veridical) return q;
  return vec(yaw_about(lv(q), lv(center), 45.0L * seat));
}

inline sparc::geo::Vec3 canonical(sparc::geo::Vec3 p, int seat, sparc::Condition c, sparc::geo::Vec3 center) {
  if (c == sparc::Condition::Veridical) return p;
  return vec(yaw_about(lv(p), lv(center), -45.0L * seat));
}

// de Casteljau evaluation of a cubic Bezier.
inline sparc::geo::Vec3 bezier(const std::array<sparc::geo::Vec3, 4>& c, double t) {
  auto lerp = [t](sparc::geo::Vec3 a, sparc::geo::Vec3 b) { return a + t * (b - a); };
  const auto a = lerp(c[0], c[1]), b = lerp(c[1], c[2]), d = lerp(c[2], c[3]);
  const auto e = lerp(a, b), f = lerp(b, d);
  return lerp(e, f);
}

// Smallest t >= 0 with |o + t d - c|^2 = r^2, solved with the full quadratic.
inline std::optional<double> sphere_hit(sparc::geo::Vec3 o, sparc::geo::Vec3 d, sparc::geo::Vec3 c, double r) {
  const long double A = (long double)d.x * d.x + (long double)d.y * d.y + (long double)d.z * d.z;
  const long double ox = o.x - c.x, oy = o.y - c.y, oz = o.z - c.z;
  const long double B = 2.0L * (ox * d.x + oy * d.y + oz * d.z);
  const long double C = ox * ox + oy * oy + oz * oz - (long double)r * r;
  const long double disc = B * B - 4.0L * A * C;
  if (disc < 0) return std::nullopt;
  const long double s = std::sqrt(disc);
  const long double t0 = (-B - s) / (2.0L * A), t1 = (-B + s) / (2.0L * A);
  if (t0 >= 0) return (double)t0;
  if (t1 >= 0) return (double)t1;
  return std::nullopt;
}

using Mat = std::array<std::array<int, 3>, 3>;

inline Mat mul(const Mat& a, const Mat& b) {
  Mat m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) m[i][j] += a[i][k] * b[k][j];
  return m;
}

// Closure of the quarter turns about x and y.
inline std::vector<Mat> rotation_group() {
  const Mat rx{{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}};
  const Mat ry{{{0, 0, 1}, {0, 1, 0}, {-1, 0, 0}}};
  std::set<Mat> seen{Mat{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}};
  std::vector<Mat> frontier(seen.begin(), seen.end());
  while (!frontier.empty()) {
    std::vector<Mat> next;
    for (const Mat& m : frontier)
      for (const Mat& g : {rx, ry}) {
        Mat p = mul(g, m);
        if (seen.insert(p).second) next.push_back(p);
      }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

using Cells = std::vector<std::array<int, 3>>;

inline Cells normalized(Cells c) {
  std::array<int, 3> lo{1 << 20, 1 << 20, 1 << 20};
  for (auto& v : c)
    for (int i = 0; i < 3; ++i) lo[i] = std::min(lo[i], v[i]);
  for (auto& v : c)
    for (int i = 0; i < 3; ++i) v[i] -= lo[i];
  std::sort(c.begin(), c.end());
  return c;
}

inline std::set<Cells> distinct_orientations(const Cells& cells) {
  std::set<Cells> shapes;
  for (const Mat& m : rotation_group()) {
    Cells c;
    for (const auto& v : cells) {
      std::array<int, 3> r{};
      for (int i = 0; i < 3; ++i) r[i] = m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2];
      c.push_back(r);
    }
    shapes.insert(normalized(c));
  }
  return shapes;
}

// Counts tilings by trying every assignment of a distinct orientation and
// offset to each piece in turn and keeping the ones that exactly fill the cube.
inline std::uint64_t brute_force_tilings(const sparc::puzzle::PieceSet& set, int dim) {
  std::vector<std::vector<std::uint64_t>> masks(set.pieces.size());
  for (std::size_t p = 0; p < set.pieces.size(); ++p) {
    Cells cells;
    for (const auto& cell : set.pieces[p].cells) cells.push_back({cell.x, cell.y, cell.z});
    const std::set<Cells> shapes = distinct_orientations(cells);
    for (const Cells& s : shapes)
      for (int ox = 0; ox < dim; ++ox)
        for (int oy = 0; oy < dim; ++oy)
          for (int oz = 0; oz < dim; ++oz) {
            std::uint64_t mask = 0;
            bool inside = true;
            for (const auto& c : s) {
              const int x = c[0] + ox, y = c[1] + oy, z = c[2] + oz;
              if (x >= dim || y >= dim || z >= dim) inside = false;
              else mask |= 1ull << ((z * dim + y) * dim + x);
            }
            if (inside) masks[p].push_back(mask);
          }
  }
  const std::uint64_t full = dim * dim * dim == 64 ? ~0ull : (1ull << (dim * dim * dim)) - 1;
  std::uint64_t count = 0;
  std::vector<std::size_t> idx(masks.size(), 0);
  // Odometer over the full cartesian product.
  while (true) {
    std::uint64_t acc = 0;
    bool overlap = false;
    for (std::size_t p = 0; p < masks.size(); ++p) {
      if (acc & masks[p][idx[p]]) overlap = true;
      acc |= masks[p][idx[p]];
    }
    if (!overlap && acc == full) ++count;
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == masks[k].size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return count;
}

}  // namespace oracle
}  // namespace test
