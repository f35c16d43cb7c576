#pragma once

#include "geometry.hpp"

#include <map>
#include <memory>
#include <variant>
#include <vector>

namespace unrect {

// Axis-aligned rational window.
struct Window {
  Rat x0, y0, x1, y1;
  Window() : x0(-2), y0(-2), x1(3), y1(3) {}
  Window(Rat a, Rat b, Rat c, Rat d)
      : x0(std::move(a)), y0(std::move(b)), x1(std::move(c)), y1(std::move(d)) {}
  bool contains(const RVec& z) const {
    return z.x >= x0 && z.x <= x1 && z.y >= y0 && z.y <= y1;
  }
  std::vector<RVec> corners() const {
    return {RVec(x0, y0), RVec(x1, y0), RVec(x1, y1), RVec(x0, y1)};
  }
  // does the line meet the closed window?
  bool crossed_by(const RLine& l) const;
};

// Open convex cell of a line arrangement, stored as its closed vertex
// polygon (ccw) plus a strictly interior sample point.
struct Cell {
  int id = -1;
  std::vector<RVec> poly;
  RVec sample;                  // centroid; satisfies all half-planes strictly
  std::vector<int8_t> signs;    // sign of each arrangement line at sample
};

struct LocateOnLine {
  std::vector<int> line_ids;    // lines z lies on
};
struct LocateOutside {};
using LocateResult = std::variant<int /*cell id*/, LocateOnLine, LocateOutside>;

// Exact arrangement of finitely many lines clipped to a bounded window.
// Cells partition the window minus the union of lines; point location runs
// on rational sign vectors.
class Arrangement {
 public:
  static constexpr int kDefaultLineCap = 4096;

  // Duplicates are removed; lines missing the window are dropped.
  static std::shared_ptr<const Arrangement> build(std::vector<RLine> lines,
                                                  Window window = Window(),
                                                  int line_cap = kDefaultLineCap);

  const Window& window() const { return window_; }
  const std::vector<RLine>& lines() const { return lines_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const Cell& cell(int id) const { return cells_[size_t(id)]; }

  LocateResult locate(const RVec& z) const;

  // Pairs of cells sharing a positive-length boundary segment on some
  // arrangement line, with two interior points of the shared segment
  // (used for continuity checks).
  struct Adjacency {
    int line_id;
    int cell_a, cell_b;
    RVec p, q;  // distinct points in the relative interior of the segment
  };
  const std::vector<Adjacency>& adjacency() const { return adjacency_; }

 private:
  Window window_;
  std::vector<RLine> lines_;
  std::vector<Cell> cells_;
  std::map<std::vector<int8_t>, int> sign_index_;
  std::vector<Adjacency> adjacency_;
};

struct LineCapExceeded : std::runtime_error {
  int count;
  explicit LineCapExceeded(int n)
      : std::runtime_error("arrangement line cap exceeded: " +
                           std::to_string(n)),
        count(n) {}
};

}  // namespace unrect
