#include "sparc/puzzle.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

namespace sparc::puzzle {

CellSet make_cell_set(std::vector<Cell> cells) {
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

Cell min_corner(const CellSet& cells) {
  if (cells.empty()) return {};
  Cell m = cells.front();
  for (const Cell& c : cells) {
    m.x = std::min(m.x, c.x);
    m.y = std::min(m.y, c.y);
    m.z = std::min(m.z, c.z);
  }
  return m;
}

CellSet normalize(const CellSet& cells) {
  const Cell m = min_corner(cells);
  std::vector<Cell> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) out.push_back(c - m);
  return make_cell_set(std::move(out));
}

namespace {

std::array<IntMatrix, kOrientationCount> build_rotations() {
  std::array<IntMatrix, kOrientationCount> out{};
  std::array<int, 3> perm{0, 1, 2};
  std::size_t n = 0;
  do {
    int inversions = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (perm[i] > perm[j]) ++inversions;
    const int perm_sign = inversions % 2 == 0 ? 1 : -1;
    for (int s = 0; s < 8; ++s) {
      IntMatrix m{};
      int sign_product = 1;
      for (int i = 0; i < 3; ++i) {
        const int sign = ((s >> (2 - i)) & 1) ? -1 : 1;
        m[i][perm[i]] = sign;
        sign_product *= sign;
      }
      if (perm_sign * sign_product == 1) out[n++] = m;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

Cell apply_matrix(const IntMatrix& m, Cell c) {
  return {m[0][0] * c.x + m[0][1] * c.y + m[0][2] * c.z,
          m[1][0] * c.x + m[1][1] * c.y + m[1][2] * c.z,
          m[2][0] * c.x + m[2][1] * c.y + m[2][2] * c.z};
}

CellSet rotate_cells(const IntMatrix& m, const CellSet& cells) {
  std::vector<Cell> out;
  out.reserve(cells.size());
  for (const Cell& c : cells) out.push_back(apply_matrix(m, c));
  return make_cell_set(std::move(out));
}

int round_half_away(double v) { return static_cast<int>(std::round(v)); }

}  // namespace

const std::array<IntMatrix, kOrientationCount>& cube_rotations() {
  static const auto rotations = build_rotations();
  return rotations;
}

Orientation::Orientation(int index) : index_(index) {
  if (index < 0 || index >= kOrientationCount) {
    throw std::out_of_range("orientation index " + std::to_string(index) + " outside [0, 24)");
  }
}

const IntMatrix& Orientation::matrix() const { return cube_rotations()[static_cast<std::size_t>(index_)]; }

Cell Orientation::apply(Cell c) const { return apply_matrix(matrix(), c); }

geo::Quat Orientation::as_quat() const {
  std::array<std::array<double, 3>, 3> m{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m[i][j] = matrix()[i][j];
  return geo::quat_from_matrix(m);
}

std::vector<OrientedShape> oriented_shapes(const PieceShape& shape) {
  std::vector<OrientedShape> out;
  for (int k = 0; k < kOrientationCount; ++k) {
    const CellSet rotated = rotate_cells(cube_rotations()[static_cast<std::size_t>(k)], shape.cells);
    CellSet cells = normalize(rotated);
    const bool seen = std::any_of(out.begin(), out.end(),
                                  [&](const OrientedShape& o) { return o.cells == cells; });
    if (!seen) out.push_back({k, std::move(cells), min_corner(rotated)});
  }
  std::sort(out.begin(), out.end(),
            [](const OrientedShape& a, const OrientedShape& b) { return a.cells < b.cells; });
  return out;
}

std::vector<CellSet> orientations_of(const PieceShape& shape) {
  std::vector<CellSet> out;
  for (auto& o : oriented_shapes(shape)) out.push_back(std::move(o.cells));
  return out;
}

CellSet Placement::cells(const PieceShape& shape) const {
  std::vector<Cell> out;
  out.reserve(shape.cells.size());
  for (const Cell& c : shape.cells) out.push_back(orientation.apply(c) + offset);
  return make_cell_set(std::move(out));
}

GridSpec GridSpec::centered_on(geo::Vec3 table_center, int dim, double cell_size) {
  const double half = 0.5 * dim * cell_size;
  return {dim, cell_size, {table_center.x - half, table_center.y, table_center.z - half}};
}

geo::Vec3 GridSpec::cell_center(Cell c) const {
  return {origin.x + (c.x + 0.5) * cell_size, origin.y + (c.y + 0.5) * cell_size,
          origin.z + (c.z + 0.5) * cell_size};
}

geo::Box GridSpec::cell_box(Cell c) const {
  const geo::Vec3 lo{origin.x + c.x * cell_size, origin.y + c.y * cell_size, origin.z + c.z * cell_size};
  return {lo, lo + geo::Vec3{cell_size, cell_size, cell_size}};
}

geo::Box GridSpec::cube_box() const {
  const double e = dim * cell_size;
  return {origin, origin + geo::Vec3{e, e, e}};
}

bool GridSpec::contains(Cell c) const {
  return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dim && c.y < dim && c.z < dim;
}

int PieceSet::total_cells() const {
  int total = 0;
  for (const auto& p : pieces) total += static_cast<int>(p.cells.size());
  return total;
}

int PieceSet::dim() const {
  const int total = total_cells();
  for (int n = 1; n * n * n <= total; ++n)
    if (n * n * n == total) return n;
  return 0;
}

const PieceShape* PieceSet::find(std::string_view id) const {
  for (const auto& p : pieces)
    if (p.id == id) return &p;
  return nullptr;
}

const PieceShape& PieceSet::shape(std::string_view id) const {
  if (const auto* p = find(id)) return *p;
  throw std::out_of_range("unknown piece '" + std::string(id) + "'");
}

CubeGrid::CubeGrid(int dim) : dim_(dim), cells_(static_cast<std::size_t>(dim * dim * dim)) {}

bool CubeGrid::contains(Cell c) const {
  return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dim_ && c.y < dim_ && c.z < dim_;
}

const std::string& CubeGrid::at(Cell c) const {
  static const std::string outside;
  if (!contains(c)) return outside;
  return cells_[static_cast<std::size_t>(index(c))];
}

void CubeGrid::place(const std::string& piece_id, const CellSet& cells) {
  for (const Cell& c : cells) {
    if (!contains(c)) throw std::logic_error("placement leaves the grid");
    if (occupied(c)) throw std::logic_error("cell already occupied by " + at(c));
  }
  for (const Cell& c : cells) cells_[static_cast<std::size_t>(index(c))] = piece_id;
}

int CubeGrid::occupied_count() const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(),
                                        [](const std::string& s) { return !s.empty(); }));
}

Placement placement_at(const PieceShape& shape, const geo::Pose& pose, const GridSpec& grid) {
  const auto r = geo::to_matrix(geo::normalized(pose.q));
  int best = 0;
  double best_trace = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kOrientationCount; ++k) {
    const IntMatrix& m = cube_rotations()[static_cast<std::size_t>(k)];
    double trace = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trace += r[i][j] * m[i][j];
    if (trace > best_trace) {
      best_trace = trace;
      best = k;
    }
  }
  const double s = grid.cell_size;
  const Cell offset{round_half_away((pose.p.x - grid.origin.x) / s - 0.5),
                    round_half_away((pose.p.y - grid.origin.y) / s - 0.5),
                    round_half_away((pose.p.z - grid.origin.z) / s - 0.5)};
  return {shape.id, Orientation(best), offset};
}

geo::Pose pose_of(const Placement& placement, const GridSpec& grid) {
  return {grid.cell_center(placement.offset), placement.orientation.as_quat()};
}

SnappedPose snap_pose(const PieceShape& shape, const geo::Pose& pose, const GridSpec& grid) {
  SnappedPose out;
  out.placement = placement_at(shape, pose, grid);
  out.pose = pose_of(out.placement, grid);
  out.cells = out.placement.cells(shape);
  out.in_cube = std::all_of(out.cells.begin(), out.cells.end(),
                            [&](const Cell& c) { return grid.contains(c); });
  return out;
}

std::string_view to_string(ReleaseOutcome outcome) {
  switch (outcome) {
    case ReleaseOutcome::Correct: return "correct";
    case ReleaseOutcome::WrongInCube: return "wrong_in_cube";
    case ReleaseOutcome::OutsideCube: return "outside_cube";
  }
  return "?";
}

ReleaseOutcome classify_release(const SnappedPose& snapped, const CubeGrid& grid,
                                const Placement& target, const PieceSet& pieces) {
  const bool inside = std::all_of(snapped.cells.begin(), snapped.cells.end(),
                                  [&](const Cell& c) { return grid.contains(c); });
  if (!inside) return ReleaseOutcome::OutsideCube;
  const bool overlaps = std::any_of(snapped.cells.begin(), snapped.cells.end(),
                                    [&](const Cell& c) { return grid.occupied(c); });
  if (!overlaps && snapped.placement.piece_id == target.piece_id &&
      snapped.cells == target.cells(pieces.shape(target.piece_id))) {
    return ReleaseOutcome::Correct;
  }
  return ReleaseOutcome::WrongInCube;
}

namespace {

struct Candidate {
  std::uint64_t mask;
  Placement placement;
};

class ExactCover {
 public:
  ExactCover(const PieceSet& pieces, int dim) : pieces_(pieces), dim_(dim) {
    const int cells = dim * dim * dim;
    full_ = cells == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << cells) - 1);
    candidates_.resize(pieces.pieces.size(), std::vector<std::vector<Candidate>>(static_cast<std::size_t>(cells)));
    for (std::size_t p = 0; p < pieces.pieces.size(); ++p) {
      const PieceShape& shape = pieces.pieces[p];
      for (const OrientedShape& o : oriented_shapes(shape)) {
        const Cell extent = max_corner(o.cells);
        for (int z = 0; z + extent.z < dim; ++z)
          for (int y = 0; y + extent.y < dim; ++y)
            for (int x = 0; x + extent.x < dim; ++x) {
              const Cell at{x, y, z};
              std::uint64_t mask = 0;
              int anchor = cells;
              for (const Cell& c : o.cells) {
                const int idx = linear(c + at);
                mask |= std::uint64_t{1} << idx;
                anchor = std::min(anchor, idx);
              }
              Placement placement{shape.id, Orientation(o.orientation), at - o.shift};
              candidates_[p][static_cast<std::size_t>(anchor)].push_back({mask, std::move(placement)});
            }
      }
    }
  }

  std::uint64_t run(std::uint64_t limit, const SolutionVisitor& visit) {
    limit_ = limit;
    visit_ = &visit;
    found_ = 0;
    stop_ = false;
    used_.assign(pieces_.pieces.size(), false);
    stack_.placements.clear();
    search(0);
    return found_;
  }

 private:
  static Cell max_corner(const CellSet& cells) {
    Cell m{};
    for (const Cell& c : cells) m = {std::max(m.x, c.x), std::max(m.y, c.y), std::max(m.z, c.z)};
    return m;
  }

  int linear(Cell c) const { return (c.z * dim_ + c.y) * dim_ + c.x; }

  void search(std::uint64_t occupied) {
    if (occupied == full_) {
      ++found_;
      if (!(*visit_)(stack_) || (limit_ > 0 && found_ >= limit_)) stop_ = true;
      return;
    }
    const auto cell = static_cast<std::size_t>(std::countr_zero(~occupied));
    for (std::size_t p = 0; p < used_.size(); ++p) {
      if (used_[p]) continue;
      used_[p] = true;
      for (const Candidate& c : candidates_[p][cell]) {
        if (c.mask & occupied) continue;
        stack_.placements.push_back(c.placement);
        search(occupied | c.mask);
        stack_.placements.pop_back();
        if (stop_) break;
      }
      used_[p] = false;
      if (stop_) return;
    }
  }

  const PieceSet& pieces_;
  int dim_;
  std::uint64_t full_ = 0;
  std::vector<std::vector<std::vector<Candidate>>> candidates_;
  std::vector<bool> used_;
  SolutionSequence stack_;
  std::uint64_t limit_ = 0;
  std::uint64_t found_ = 0;
  bool stop_ = false;
  const SolutionVisitor* visit_ = nullptr;
};

}  // namespace

std::uint64_t solve(const PieceSet& pieces, int grid_dim, std::uint64_t limit,
                    const SolutionVisitor& visit) {
  if (grid_dim <= 0 || grid_dim * grid_dim * grid_dim > 64) {
    throw std::invalid_argument("grid dimension must satisfy 0 < dim^3 <= 64");
  }
  const int needed = grid_dim * grid_dim * grid_dim;
  if (pieces.total_cells() != needed) {
    throw std::invalid_argument("piece set has " + std::to_string(pieces.total_cells()) +
                                " cells, grid needs " + std::to_string(needed));
  }
  ExactCover cover(pieces, grid_dim);
  const std::uint64_t found = cover.run(limit, visit);
  if (found == 0 && limit > 0) throw NoSolution();
  return found;
}

std::vector<SolutionSequence> solve(const PieceSet& pieces, int grid_dim, std::uint64_t limit) {
  std::vector<SolutionSequence> out;
  solve(pieces, grid_dim, limit, [&](const SolutionSequence& s) {
    out.push_back(s);
    return true;
  });
  return out;
}

void check_partition(const SolutionSequence& solution, const PieceSet& pieces, int grid_dim) {
  CubeGrid grid(grid_dim);
  std::set<std::string> seen;
  for (const Placement& p : solution.placements) {
    if (!seen.insert(p.piece_id).second) throw std::invalid_argument("piece used twice: " + p.piece_id);
    try {
      grid.place(p.piece_id, p.cells(pieces.shape(p.piece_id)));
    } catch (const std::logic_error& e) {
      throw std::invalid_argument(std::string("placements overlap or leave the grid: ") + e.what());
    }
  }
  if (grid.occupied_count() != grid_dim * grid_dim * grid_dim) {
    throw std::invalid_argument("placements do not cover the grid");
  }
}

ParseError::ParseError(int line, int column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::string piece, const std::string& what)
    : std::runtime_error(piece.empty() ? what : "piece '" + piece + "': " + what), piece_(std::move(piece)) {}

bool is_connected(const CellSet& cells) {
  if (cells.empty()) return false;
  std::set<Cell> remaining(cells.begin(), cells.end());
  std::vector<Cell> frontier{cells.front()};
  remaining.erase(cells.front());
  static constexpr std::array<Cell, 6> kSteps{{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
  while (!frontier.empty()) {
    const Cell c = frontier.back();
    frontier.pop_back();
    for (const Cell& step : kSteps) {
      auto it = remaining.find(c + step);
      if (it != remaining.end()) {
        frontier.push_back(*it);
        remaining.erase(it);
      }
    }
  }
  return remaining.empty();
}

TablePose default_home(const PieceShape& shape, int index, int count, const GridSpec& grid) {
  constexpr double kRingRadius = 0.36;
  const double angle = 2.0 * std::numbers::pi * index / std::max(count, 1);
  const double half = 0.5 * grid.dim * grid.cell_size;
  const geo::Vec3 center{grid.origin.x + half, grid.origin.y, grid.origin.z + half};
  const geo::Vec3 spot = center + geo::Vec3{kRingRadius * std::cos(angle), 0.0, kRingRadius * std::sin(angle)};
  Placement placement = placement_at(shape, {spot, {}}, grid);
  placement.offset.y = 0;
  return {grid.cell_center(placement.offset), 0};
}

namespace {

struct Token {
  std::string_view text;
  int column;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r' && line[i] != '#') ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

template <typename T>
T parse_number(const Token& tok, int line) {
  T value{};
  const char* end = tok.text.data() + tok.text.size();
  auto [ptr, ec] = std::from_chars(tok.text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, tok.column, "expected a number, got '" + std::string(tok.text) + "'");
  }
  return value;
}

void expect_args(const std::vector<Token>& toks, std::size_t count, int line, std::string_view line_text) {
  if (toks.size() != count + 1) {
    const int column = toks.size() > count + 1 ? toks[count + 1].column : static_cast<int>(line_text.size()) + 1;
    throw ParseError(line, column,
                     "'" + std::string(toks[0].text) + "' takes " + std::to_string(count) + " arguments");
  }
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

PieceSet load_piece_set(std::string_view text, const GridSpec& grid) {
  struct Pending {
    std::string id;
    std::vector<Cell> cells;
    std::optional<TablePose> home;
  };
  std::vector<Pending> pending;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string_view directive = toks[0].text;
    if (directive == "piece") {
      expect_args(toks, 1, line_no, line);
      pending.push_back({std::string(toks[1].text), {}, std::nullopt});
    } else if (directive == "cell" || directive == "home") {
      if (pending.empty()) {
        throw ParseError(line_no, toks[0].column, "'" + std::string(directive) + "' before any 'piece'");
      }
      if (directive == "cell") {
        expect_args(toks, 3, line_no, line);
        pending.back().cells.push_back({parse_number<int>(toks[1], line_no), parse_number<int>(toks[2], line_no),
                                        parse_number<int>(toks[3], line_no)});
      } else {
        expect_args(toks, 4, line_no, line);
        if (pending.back().home) throw ParseError(line_no, toks[0].column, "duplicate 'home'");
        const geo::Vec3 p{parse_number<double>(toks[1], line_no), parse_number<double>(toks[2], line_no),
                          parse_number<double>(toks[3], line_no)};
        const int orient = parse_number<int>(toks[4], line_no);
        if (orient < 0 || orient >= kOrientationCount) {
          throw ParseError(line_no, toks[4].column, "orientation index outside [0, 24)");
        }
        if (!geo::is_finite(p)) throw ParseError(line_no, toks[1].column, "home position must be finite");
        pending.back().home = TablePose{p, orient};
      }
    } else {
      throw ParseError(line_no, toks[0].column, "unknown directive '" + std::string(directive) + "'");
    }
  }

  PieceSet out;
  std::set<std::string> ids;
  for (const auto& p : pending) {
    if (!ids.insert(p.id).second) throw ValidationError(p.id, "duplicate piece id");
    if (p.cells.empty()) throw ValidationError(p.id, "no cells");
    std::set<Cell> unique;
    for (const Cell& c : p.cells) {
      if (!unique.insert(c).second) {
        throw ValidationError(p.id, "duplicate cell " + std::to_string(c.x) + " " + std::to_string(c.y) + " " +
                                        std::to_string(c.z));
      }
    }
    CellSet cells = normalize(make_cell_set(p.cells));
    if (!is_connected(cells)) throw ValidationError(p.id, "not 6-connected");
    out.pieces.push_back({p.id, std::move(cells)});
  }
  if (out.pieces.empty()) throw ValidationError("", "piece set is empty");
  if (out.dim() == 0) {
    throw ValidationError("", "total cell count " + std::to_string(out.total_cells()) + " is not a cube");
  }
  const int count = static_cast<int>(out.pieces.size());
  for (int i = 0; i < count; ++i) {
    const auto& p = pending[static_cast<std::size_t>(i)];
    out.table_home[p.id] = p.home ? *p.home : default_home(out.pieces[static_cast<std::size_t>(i)], i, count, grid);
  }
  return out;
}

PieceSet load_piece_set_file(const std::string& path, const GridSpec& grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open piece file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_piece_set(buf.str(), grid);
}

std::string serialize(const PieceSet& pieces) {
  std::string out;
  for (const auto& p : pieces.pieces) {
    out += "piece " + p.id + "\n";
    for (const Cell& c : p.cells) {
      out += "cell " + std::to_string(c.x) + " " + std::to_string(c.y) + " " + std::to_string(c.z) + "\n";
    }
    if (auto it = pieces.table_home.find(p.id); it != pieces.table_home.end()) {
      out += "home ";
      append_double(out, it->second.position.x);
      out += ' ';
      append_double(out, it->second.position.y);
      out += ' ';
      append_double(out, it->second.position.z);
      out += ' ' + std::to_string(it->second.orientation) + "\n";
    }
  }
  return out;
}

}  // namespace sparc::puzzle
