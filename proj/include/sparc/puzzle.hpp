#pragma once

// Polycube assembly task: shapes, the 24 proper cube rotations, grid
// snapping, release classification and an exact-cover solver.

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sparc/geometry.hpp"

namespace sparc::puzzle {

struct Cell {
  int x = 0;
  int y = 0;
  int z = 0;

  friend constexpr Cell operator+(Cell a, Cell b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Cell operator-(Cell a, Cell b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

/// Sorted, duplicate-free list of cells.
using CellSet = std::vector<Cell>;

CellSet make_cell_set(std::vector<Cell> cells);
/// Translates so that the componentwise minimum is (0,0,0); result sorted.
CellSet normalize(const CellSet& cells);
Cell min_corner(const CellSet& cells);

using IntMatrix = std::array<std::array<int, 3>, 3>;

inline constexpr int kOrientationCount = 24;

/// One of the 24 proper axis-aligned rotations. Index 0 is the identity.
class Orientation {
 public:
  /// Throws std::out_of_range outside [0, 24).
  explicit Orientation(int index);
  int index() const { return index_; }
  const IntMatrix& matrix() const;
  Cell apply(Cell c) const;
  geo::Quat as_quat() const;
  friend constexpr auto operator<=>(const Orientation&, const Orientation&) = default;

 private:
  int index_ = 0;
};

const std::array<IntMatrix, kOrientationCount>& cube_rotations();

struct PieceShape {
  std::string id;
  CellSet cells;

  friend bool operator==(const PieceShape&, const PieceShape&) = default;
};

/// A distinct orientation of a shape: normalized cells plus the first
/// rotation index that produces them.
struct OrientedShape {
  int orientation = 0;
  CellSet cells;
  /// Minimum corner of the rotated, un-normalized cells.
  Cell shift;
};

/// Distinct normalized cell sets over all 24 rotations, sorted lexicographically.
std::vector<CellSet> orientations_of(const PieceShape& shape);
std::vector<OrientedShape> oriented_shapes(const PieceShape& shape);

struct Placement {
  std::string piece_id;
  Orientation orientation{0};
  Cell offset;

  /// Grid cells covered: rotation applied to the shape's cells, then offset.
  CellSet cells(const PieceShape& shape) const;
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct TablePose {
  geo::Vec3 position;
  int orientation = 0;

  friend bool operator==(const TablePose&, const TablePose&) = default;
};

/// Physical embedding of the cube lattice. Cell (i,j,k) has its center at
/// origin + (i+0.5, j+0.5, k+0.5) * cell_size.
struct GridSpec {
  int dim = 4;
  double cell_size = 0.06;
  geo::Vec3 origin{-0.12, 0.75, -0.12};

  /// Cube centered horizontally on the table center, resting on the table plane.
  static GridSpec centered_on(geo::Vec3 table_center, int dim = 4, double cell_size = 0.06);
  geo::Vec3 cell_center(Cell c) const;
  geo::Box cell_box(Cell c) const;
  geo::Box cube_box() const;
  bool contains(Cell c) const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct PieceSet {
  std::vector<PieceShape> pieces;
  std::map<std::string, TablePose> table_home;

  /// Edge length of the cube the pieces fill (total cells == dim^3).
  int dim() const;
  int total_cells() const;
  const PieceShape* find(std::string_view id) const;
  /// Throws std::out_of_range for unknown ids.
  const PieceShape& shape(std::string_view id) const;

  friend bool operator==(const PieceSet&, const PieceSet&) = default;
};

class CubeGrid {
 public:
  explicit CubeGrid(int dim = 4);

  int dim() const { return dim_; }
  bool contains(Cell c) const;
  /// Empty string for a free cell.
  const std::string& at(Cell c) const;
  bool occupied(Cell c) const { return !at(c).empty(); }
  /// Throws std::logic_error if a cell is outside or already taken.
  void place(const std::string& piece_id, const CellSet& cells);
  int occupied_count() const;

  friend bool operator==(const CubeGrid&, const CubeGrid&) = default;

 private:
  int index(Cell c) const { return (c.z * dim_ + c.y) * dim_ + c.x; }
  int dim_;
  std::vector<std::string> cells_;
};

struct SolutionSequence {
  std::vector<Placement> placements;
  friend bool operator==(const SolutionSequence&, const SolutionSequence&) = default;
};

struct SnappedPose {
  Placement placement;
  geo::Pose pose;
  CellSet cells;
  bool in_cube = false;
};

/// Snaps a free pose of `shape` to the lattice: position to the nearest cell
/// center (round half away from zero), rotation to the nearest of the 24
/// cube rotations (max trace of R^T * R_k, ties to the lowest index).
SnappedPose snap_pose(const PieceShape& shape, const geo::Pose& pose, const GridSpec& grid);
geo::Pose pose_of(const Placement& placement, const GridSpec& grid);
Placement placement_at(const PieceShape& shape, const geo::Pose& pose, const GridSpec& grid);

enum class ReleaseOutcome { Correct, WrongInCube, OutsideCube };

std::string_view to_string(ReleaseOutcome outcome);

ReleaseOutcome classify_release(const SnappedPose& snapped, const CubeGrid& grid,
                                const Placement& target, const PieceSet& pieces);

class NoSolution : public std::runtime_error {
 public:
  NoSolution() : std::runtime_error("piece set admits no tiling") {}
};

/// Called for every tiling found; return false to stop the search.
using SolutionVisitor = std::function<bool(const SolutionSequence&)>;

/// Depth-first exact cover, always filling the lowest empty cell (linear
/// order x fastest, then y, then z). Stops after `limit` solutions when
/// limit > 0, runs to exhaustion when limit == 0. Returns the number visited.
/// Throws std::invalid_argument when the cell count is not dim^3 (or dim^3 > 64),
/// NoSolution when limit > 0 and nothing was found.
std::uint64_t solve(const PieceSet& pieces, int grid_dim, std::uint64_t limit,
                    const SolutionVisitor& visit);
std::vector<SolutionSequence> solve(const PieceSet& pieces, int grid_dim, std::uint64_t limit);

/// Throws std::invalid_argument unless the placements partition the grid.
void check_partition(const SolutionSequence& solution, const PieceSet& pieces, int grid_dim);

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string piece, const std::string& what);
  const std::string& piece() const { return piece_; }

 private:
  std::string piece_;
};

/// Parses the piece-set text format. Pieces without a `home` line get a
/// default table pose on a ring around the cube.
PieceSet load_piece_set(std::string_view text, const GridSpec& grid = {});
PieceSet load_piece_set_file(const std::string& path, const GridSpec& grid = {});
std::string serialize(const PieceSet& pieces);

/// True when every cell is 6-connected to the others.
bool is_connected(const CellSet& cells);

/// Default home pose of the i-th of n pieces.
TablePose default_home(const PieceShape& shape, int index, int count, const GridSpec& grid);

}  // namespace sparc::puzzle
