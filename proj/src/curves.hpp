#pragma once

#include "construction.hpp"
#include "geometry.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <functional>
#include <set>
#include <variant>
#include <vector>

namespace unrect {

struct TangencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CrossingCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unit-speed C1 curve assembled from line segments, circular arcs and cubic
// Hermite pieces. Ingestion reparametrizes to arc length (quadrature
// tolerance 1e-8) and rejects corners: adjacent pieces must meet with
// matching unit tangents.
class C1Curve {
 public:
  double length() const { return length_; }
  Vec2 eval(double s) const;
  Vec2 deriv(double s) const;  // unit tangent

  static C1Curve segment(Vec2 a, Vec2 b);
  static C1Curve arc(Vec2 center, double radius, double angle0, double angle1);
  // Catmull-Rom-style chain through points with prescribed end tangents;
  // speed must stay positive, tangents must chain C1.
  static C1Curve hermite(Vec2 p0, Vec2 m0, Vec2 p1, Vec2 m1);
  static C1Curve from_json(const std::string& text);
  static C1Curve load(const std::string& path);

  // join two curves end to end (tangent-matched)
  C1Curve& append(const C1Curve& other);

  // max deviation of ||gamma'|| from 1 on a dense grid (diagnostic)
  double unit_speed_defect(int grid = 2048) const;

  struct LineSeg {
    Vec2 p0, dir;  // unit dir
    double len;
  };
  struct ArcSeg {
    Vec2 center;
    double radius, angle0;
    int orient;  // +1 ccw, -1 cw
    double len;
  };
  struct HermiteSeg {
    Vec2 p0, m0, p1, m1;
    double len;
    std::vector<double> s_table, t_table;  // arclength <-> parameter
  };
  using Seg = std::variant<LineSeg, ArcSeg, HermiteSeg>;

 private:
  std::vector<Seg> segs_;
  std::vector<double> offsets_;  // cumulative arclength, size = segs+1
  double length_ = 0;

  std::pair<size_t, double> locate(double s) const;
  friend C1Curve make_curve(std::vector<C1Curve::Seg> segs);
};

// Planar region against which curve preimages are measured.
struct StripRegion {
  Vec2 base, dir;  // unit dir
  double half_width;
};
struct BallRegion {
  Vec2 center;
  double radius;
};
struct PolyRegion {
  std::vector<Vec2> pts;  // convex, ccw
};
using Region = std::variant<StripRegion, BallRegion, PolyRegion>;

bool region_contains(const Region& r, const Vec2& p);
// max <y-x, v> over the region; infinite for strips not orthogonal to v
double region_diam_v(const Region& r, const UnitVec& v);

struct PreimageResult {
  double measure = 0;
  double error_bar = 0;
  int crossings = 0;
  bool below_resolution = false;
  std::vector<std::pair<double, double>> intervals;
};

// Parameter measure of gamma^-1(region) by scan + bisection root bracketing.
// Boundary tangencies (|<gamma', normal>| < 1e-6) are re-scanned at finer
// resolution; persistent tangency throws TangencyError.
PreimageResult preimage_measure(const C1Curve& c, const Region& r,
                                int scan = 4096, int crossing_cap = 512);

struct CheckReport {
  std::string check_id;
  double lhs = 0, rhs = 0;
  bool pass = false;
  double error_bar = 0;
  std::string note;
};

// L(gamma^-1(W)) <= diam_v(W)/(1-delta) for curves with tangents in the
// double cone around v of width delta (verified on a grid first).
CheckReport crossing_bound_check(const C1Curve& c, const Region& w,
                                 const UnitVec& v, double delta,
                                 int scan = 4096);

// |int_{gamma^-1(P)} <gamma', e_perp>| <= 6 diam_{e_perp}(P) for curves with
// <gamma', e> >= 0.
CheckReport convex_slope_integral_check(const C1Curve& c, const PolyRegion& P,
                                        const UnitVec& e, int scan = 4096);

// ---------------------------------------------------------------------------
// strip-membership filtration along a curve

constexpr int kInfinity = std::numeric_limits<int>::max();

struct CurveAtom {
  std::vector<int> tuple;  // (k_1..k_p), kInfinity padded
  std::vector<int> intervals;
  double length = 0;
  Vec2 dgamma;      // exact integral of gamma' over the atom (endpoint sums)
  Vec2 beta;        // dgamma / length
};

struct CurvePartition {
  int level = 0;
  std::vector<double> breaks;      // shared finest breakpoints
  std::vector<int> atom_of;        // finest interval -> atom id
  std::vector<CurveAtom> atoms;
};

struct Filtration {
  const C1Curve* curve = nullptr;
  int depth = 0;        // schedule depth used
  int p_max = 0;
  std::vector<double> breaks;            // finest breakpoints incl. ends
  std::vector<std::vector<int>> k_of;    // per finest interval: k-list
  std::vector<CurvePartition> levels;    // p = 0..p_max
  int resolvable_depth = 0;              // strips wider than the float floor

  double interval_len(size_t i) const { return breaks[i + 1] - breaks[i]; }
};

// Nested partitions generated by the strip-membership counters along the
// curve. Requires tangents inside C(w, 2 eta) (checked on a grid).
Filtration build_filtration(const Construction& con, const C1Curve& c,
                            int p_max, int scan = 4096);

// Components of strip_k minus earlier boundaries visited by the curve are
// identified by their boundary sign vectors; checks the per-component
// integral of |<beta_p, e_k perp>| against 12 rho_k, and beta constancy.
std::vector<CheckReport> strip_slope_integral_check(const Construction& con,
                                                    const C1Curve& c,
                                                    const Filtration& f, int k,
                                                    int p);

struct DpResult {
  double measure = 0;
  double bound = 0;          // 2^-p
  double integral = 0;       // int_{D_p} |<beta_p, e_{k_p} perp>|
  double expectation_bound = 0;  // 4^-p
  bool pass = false;
  std::vector<std::pair<double, double>> intervals;
};
// Measures the exceedance set of the conditioned tangent against the strip
// directions at level p and checks the Markov chain
// L(D_p) <= E|X_p| / 2^-p <= 4^-p / 2^-p = 2^-p.
DpResult dp_diagnostic(const Construction& con, const Filtration& f, int p);

// For t outside D_p with finite k_p: the direction-ratio approximation
// |<w,e^perp>/<w,e> - <beta_p,w^perp>/<beta_p,w>| <= 2^-p/((1-eta)(1-delta)).
CheckReport ratio_approx_check(const Construction& con, const Filtration& f,
                               int p, double delta);

}  // namespace unrect
