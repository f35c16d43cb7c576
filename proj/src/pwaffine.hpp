#pragma once

#include "arrangement.hpp"

#include <memory>
#include <vector>

namespace unrect {

// One affine piece: value = gx*x + gy*y + b.
struct AffinePiece {
  Rat gx{0}, gy{0}, b{0};
  Rat eval(const RVec& z) const { return gx * z.x + gy * z.y + b; }
  RVec gradient() const { return RVec(gx, gy); }
  bool operator==(const AffinePiece& o) const {
    return gx == o.gx && gy == o.gy && b == o.b;
  }
};

// Thrown by gradient queries on arrangement lines; carries the gradients of
// all incident cells.
struct OnLineGradient : std::runtime_error {
  std::vector<RVec> gradients;
  explicit OnLineGradient(std::vector<RVec> g)
      : std::runtime_error("gradient requested on an arrangement line"),
        gradients(std::move(g)) {}
};

// Continuous piecewise-affine function over an exact line arrangement.
// A sentinel +infinity value is allowed as the neutral element of pa_min.
struct PwAffine {
  std::shared_ptr<const Arrangement> arr;
  std::vector<AffinePiece> pieces;  // indexed by cell id
  bool plus_infinity = false;
  // set by pa_min when the two inputs coincide on a full cell
  bool degenerate_overlap = false;

  static PwAffine infinity_sentinel() {
    PwAffine f;
    f.plus_infinity = true;
    return f;
  }
  static PwAffine constant(const Rat& c, Window w = Window());
  static PwAffine affine(const Rat& gx, const Rat& gy, const Rat& b,
                         Window w = Window());
};

Rat pa_eval(const PwAffine& f, const RVec& z);
RVec pa_gradient(const PwAffine& f, const RVec& z);  // throws OnLineGradient

// Pointwise minimum. The result arrangement carries both input line sets
// plus every coincidence line that crosses the interior of an overlapping
// cell pair.
PwAffine pa_min(const PwAffine& f, const PwAffine& g);

// scale * dist(z, union of lines) as a piecewise-affine function. For lines
// whose normal has irrational norm the divisor is a certified rational
// upper bound within relative 2^-48, making the result an exact
// piecewise-affine minorant of the true distance within that factor.
// Empty input yields the +infinity sentinel.
PwAffine pa_dist_to_lines(const std::vector<RLine>& lines, const Rat& scale,
                          Window w = Window());

struct ContinuityReport {
  bool ok = true;
  int edges_checked = 0;
};
// Exact continuity audit across every shared cell boundary.
ContinuityReport pa_check_continuity(const PwAffine& f);

// max over cells of squared gradient norm
Rat pa_lipschitz2(const PwAffine& f);

// One-dimensional piecewise-affine restriction: nodes (increasing) with
// values; affine in between.
struct SegPA {
  std::vector<Rat> nodes;
  std::vector<Rat> values;
  Rat at(const Rat& t) const;
};

// Restriction of f to the segment z + t*dir, t in [lo, hi]. dir need not be
// unit; slopes are per unit of t.
SegPA pa_restrict(const PwAffine& f, const RVec& z, const RVec& dir,
                  const Rat& lo, const Rat& hi);

struct ChordExtrema {
  Rat min_slope, max_slope;
  Rat a_min, b_min, a_max, b_max;  // witnessing endpoint offsets
  bool degenerate = false;         // single admissible chord family
};

// Exact extrema of chord slopes (g(b)-g(a))/(b-a) over node pairs
// a <= 0 <= b, (a,b) != (0,0). The node set must contain 0 and the
// endpoints; extrema over the continuum are attained on it.
ChordExtrema chord_slope_extrema(const SegPA& g);

// convenience form: restrict f to z + t e, t in [-eps, eps], then take the
// extrema over the breakpoint/endpoint node set
ChordExtrema chord_slope_extrema(const PwAffine& f, const RVec& z,
                                 const RVec& e_dir, const Rat& eps);

}  // namespace unrect
