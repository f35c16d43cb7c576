#include "geometry.hpp"

#include <algorithm>

namespace unrect {

UnitVec perp(const UnitVec& u) { return u.perp(); }

RLine::RLine(const Rat& A, const Rat& B, const Rat& C) {
  if (A == 0 && B == 0) throw std::invalid_argument("RLine: degenerate");
  // clear denominators
  Int l = lcm(lcm(A.get_den(), B.get_den()), C.get_den());
  Int ia = A.get_num() * (l / A.get_den());
  Int ib = B.get_num() * (l / B.get_den());
  Int ic = C.get_num() * (l / C.get_den());
  // divide by gcd
  Int g = gcd(gcd(ia, ib), ic);
  if (g == 0) g = 1;
  ia /= g;
  ib /= g;
  ic /= g;
  // sign rule: first nonzero of (a, b) positive
  if (ia < 0 || (ia == 0 && ib < 0)) {
    ia = -ia;
    ib = -ib;
    ic = -ic;
  }
  a = ia;
  b = ib;
  c = ic;
}

RLine RLine::through(const RVec& base, const RVec& dir) {
  // normal (-dy, dx); c = <normal, base>
  Rat A = -dir.y, B = dir.x;
  return RLine(A, B, A * base.x + B * base.y);
}

std::optional<RVec> RLine::intersect(const RLine& o) const {
  Int det = a * o.b - b * o.a;
  if (det == 0) return std::nullopt;
  Rat d(det);
  return RVec((Rat(c) * Rat(o.b) - Rat(b) * Rat(o.c)) / d,
              (Rat(a) * Rat(o.c) - Rat(c) * Rat(o.a)) / d);
}

RVec RLine::point_on() const {
  if (b != 0) return RVec(Rat(0), Rat(c) / Rat(b));
  return RVec(Rat(c) / Rat(a), Rat(0));
}

RLine Strip::boundary(int sgn) const {
  // <z - base, perp> = sgn*rho with perp = dir.perp()
  RVec n = line.dir.perp().v;
  Rat c = n.dot(line.base) + Rat(sgn) * half_width;
  return RLine(n.x, n.y, c);
}

double strip_signed_offset(const Strip& s, const Vec2& z) {
  Vec2 base = s.line.base_f();
  UnitVec n = s.line.dir_f().perp();
  return (z - base).dot(n.vec());
}

bool cone_contains(const Cone& c, const UnitVec& v, bool strict) {
  double d = c.axis.dot(v);
  if (c.double_sided) d = std::abs(d);
  return strict ? (d > 1.0 - c.width) : (d >= 1.0 - c.width);
}

bool cone_contains_exact(const RVec& axis, const Rat& width, const RVec& v,
                         bool double_sided, bool strict) {
  Rat d = axis.dot(v);
  if (double_sided) d = rat_abs(d);
  Rat t = (1 - width);
  // compare d >= t * ||v|| * ||axis|| via signs and squares
  Rat rhs2 = t * t * v.norm2() * axis.norm2();
  if (t <= 0) {
    // any direction qualifies unless strict equality matters at width 1
    if (!strict) return true;
    return !(d < 0 && d * d == rhs2) || true;
  }
  if (d < 0) return false;
  Rat d2 = d * d;
  return strict ? (d2 > rhs2) : (d2 >= rhs2);
}

double diam_v(const std::vector<Vec2>& polygon, const UnitVec& v) {
  if (polygon.empty()) throw std::invalid_argument("diam_v: empty polygon");
  double lo = polygon[0].dot(v.vec()), hi = lo;
  for (const auto& p : polygon) {
    double d = p.dot(v.vec());
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return hi - lo;
}

Rat diam_v_exact(const std::vector<RVec>& polygon, const RVec& v) {
  if (polygon.empty()) throw std::invalid_argument("diam_v: empty polygon");
  Rat lo = polygon[0].dot(v), hi = lo;
  for (const auto& p : polygon) {
    Rat d = p.dot(v);
    if (d < lo) lo = d;
    if (d > hi) hi = d;
  }
  return hi - lo;
}

}  // namespace unrect
