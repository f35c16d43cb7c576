#pragma once

#include "rational.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace unrect {

struct Vec2 {
  double x{0}, y{0};
  Vec2() = default;
  Vec2(double xx, double yy) : x(xx), y(yy) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 to_vec2(const RVec& v) { return {to_double(v.x), to_double(v.y)}; }

// Unit vector with double coordinates, renormalized on construction.
// |x^2+y^2-1| stays below 1e-12 by contract.
struct UnitVec {
  double x{1}, y{0};
  UnitVec() = default;
  UnitVec(double xx, double yy) {
    double n = std::hypot(xx, yy);
    if (!(n > 0)) throw std::invalid_argument("UnitVec: zero vector");
    x = xx / n;
    y = yy / n;
  }
  Vec2 vec() const { return {x, y}; }
  double dot(const UnitVec& o) const { return x * o.x + y * o.y; }
  UnitVec perp() const {
    UnitVec u;
    u.x = -y;
    u.y = x;
    return u;
  }
};

// +90 degree rotation.
UnitVec perp(const UnitVec& u);

// Exact direction on the unit circle: x^2 + y^2 == 1 as rationals.
// Produced from a rational tangent half-angle, so every schedule direction
// has an exact perpendicular and exact inner products.
struct RUnit {
  RVec v;
  RUnit() : v(Rat(1), Rat(0)) {}
  explicit RUnit(RVec u) : v(std::move(u)) {
    if (v.norm2() != 1) throw std::invalid_argument("RUnit: not unit");
  }
  // direction ((1-t^2)/(1+t^2), 2t/(1+t^2))
  static RUnit from_tangent_half(const Rat& t) {
    Rat d = 1 + t * t;
    return RUnit(RVec((1 - t * t) / d, 2 * t / d));
  }
  RUnit perp() const { return RUnit(v.perp()); }
  RUnit negate() const { return RUnit(-v); }
  Rat dot(const RUnit& o) const { return v.dot(o.v); }
  Vec2 vec() const { return to_vec2(v); }
};

// Line in homogeneous rational form a x + b y = c, canonicalized to coprime
// integer coefficients with a sign convention, so lines compare and hash
// reliably. The float parametrization (base, dir) is derived on demand.
struct RLine {
  Int a{0}, b{0}, c{0};

  RLine() = default;
  RLine(const Rat& A, const Rat& B, const Rat& C);
  static RLine through(const RVec& base, const RVec& dir);

  // signed, unnormalized residual a x + b y - c
  Rat eval(const RVec& z) const {
    return Rat(a) * z.x + Rat(b) * z.y - Rat(c);
  }
  int side(const RVec& z) const {
    Rat r = eval(z);
    return r > 0 ? 1 : (r < 0 ? -1 : 0);
  }
  Rat norm2() const { return Rat(a * a + b * b); }
  RVec normal() const { return RVec(Rat(a), Rat(b)); }
  RVec direction() const { return RVec(Rat(-b), Rat(a)); }
  bool parallel_to(const RLine& o) const { return a * o.b - b * o.a == 0; }
  std::optional<RVec> intersect(const RLine& o) const;
  // squared distance from z to the line (exact rational)
  Rat dist2(const RVec& z) const {
    Rat r = eval(z);
    return r * r / norm2();
  }
  // some rational point on the line
  RVec point_on() const;

  bool operator==(const RLine& o) const {
    return a == o.a && b == o.b && c == o.c;
  }
  bool operator<(const RLine& o) const {
    if (a != o.a) return a < o.a;
    if (b != o.b) return b < o.b;
    return c < o.c;
  }
  std::string key() const {
    return a.get_str() + "|" + b.get_str() + "|" + c.get_str();
  }
};

// Line carrying both representations: exact equation plus an exact
// base/direction pair when available.
struct Line {
  RVec base;
  RUnit dir;          // stored orientation
  RLine eq;           // rational form; normal = dir.perp() up to scale

  Line() = default;
  Line(RVec base_, RUnit dir_)
      : base(std::move(base_)), dir(dir_), eq(RLine::through(base, dir.v)) {}

  Vec2 base_f() const { return to_vec2(base); }
  UnitVec dir_f() const {
    return UnitVec(to_double(dir.v.x), to_double(dir.v.y));
  }
};

// Open strip of half-width rho around a line.
struct Strip {
  Line line;
  Rat half_width;

  Strip() = default;
  Strip(Line l, Rat rho) : line(std::move(l)), half_width(std::move(rho)) {}

  // signed offset <z - base, dir_perp> (exact when dir is exact-unit)
  Rat signed_offset(const RVec& z) const {
    return (z - line.base).dot(line.dir.perp().v);
  }
  bool contains(const RVec& z) const {
    return rat_abs(signed_offset(z)) < half_width;
  }
  // the two boundary lines offset = +-rho
  RLine boundary(int sgn) const;
};

double strip_signed_offset(const Strip& s, const Vec2& z);

// Cone of directions around an axis; single sided: <v,axis> >= 1-width,
// double sided: |<v,axis>| >= 1-width.
struct Cone {
  UnitVec axis;
  double width{0};
  bool double_sided{false};

  Cone() = default;
  Cone(UnitVec ax, double w, bool dbl = false)
      : axis(ax), width(w), double_sided(dbl) {
    if (w < 0 || w > 1) throw std::invalid_argument("Cone: width not in [0,1]");
  }
};

bool cone_contains(const Cone& c, const UnitVec& v, bool strict = false);

// Exact variants on rational vectors, for predicates that feed the
// construction. Vectors need not be normalized: the comparison
// <v,w> >= (1-width)*||v||*||w|| runs on squared quantities.
bool cone_contains_exact(const RVec& axis, const Rat& width, const RVec& v,
                         bool double_sided, bool strict = false);

// directional extent of a finite point set: max <p,v> - min <p,v>
double diam_v(const std::vector<Vec2>& polygon, const UnitVec& v);
Rat diam_v_exact(const std::vector<RVec>& polygon, const RVec& v);

}  // namespace unrect
