#include "geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace unrect;

TEST_CASE("perp rotates by +90 degrees") {
  UnitVec e1(1, 0);
  CHECK(perp(e1).x == doctest::Approx(0));
  CHECK(perp(e1).y == doctest::Approx(1));
  UnitVec e2(0, 1);
  CHECK(perp(e2).x == doctest::Approx(-1));
  CHECK(perp(e2).y == doctest::Approx(0));
  double r = std::sqrt(0.5);
  UnitVec d(r, r);
  CHECK(perp(d).x == doctest::Approx(-r));
  CHECK(perp(d).y == doctest::Approx(r));
}

TEST_CASE("perp is an isometry and an involution up to sign") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    double a = rng.uniform(0, 2 * M_PI);
    UnitVec u(std::cos(a), std::sin(a));
    UnitVec p = perp(u);
    CHECK(std::abs(p.x * p.x + p.y * p.y - 1.0) <= 1e-12);
    CHECK(std::abs(u.dot(p)) <= 1e-12);
    UnitVec pp = perp(p);
    CHECK(pp.x == doctest::Approx(-u.x));
    CHECK(pp.y == doctest::Approx(-u.y));
  }
}

TEST_CASE("cone membership") {
  Cone c(UnitVec(1, 0), 0.5, false);
  CHECK(cone_contains(c, UnitVec(0.6, 0.8)));
  CHECK_FALSE(cone_contains(c, UnitVec(-0.6, 0.8)));
  Cone d(UnitVec(1, 0), 0.5, true);
  CHECK(cone_contains(d, UnitVec(-0.6, 0.8)));

  Cone degenerate(UnitVec(1, 0), 0.0, false);
  CHECK(cone_contains(degenerate, UnitVec(1, 0)));
  CHECK_FALSE(cone_contains(degenerate, UnitVec(0, 1)));
}

TEST_CASE("double cone equals union of the two single cones") {
  Rng rng(12);
  for (int i = 0; i < 10000; ++i) {
    double aw = rng.uniform(0, 2 * M_PI);
    double av = rng.uniform(0, 2 * M_PI);
    double width = rng.uniform(0, 1);
    UnitVec w(std::cos(aw), std::sin(aw));
    UnitVec v(std::cos(av), std::sin(av));
    UnitVec wneg(-w.x, -w.y);
    bool single_union = cone_contains(Cone(w, width, false), v) ||
                        cone_contains(Cone(wneg, width, false), v);
    bool dbl = cone_contains(Cone(w, width, true), v);
    CHECK(single_union == dbl);
  }
}

TEST_CASE("exact cone test agrees with the squared-inequality form") {
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    RUnit w = RUnit::from_tangent_half(rng.uniform_rat(10) - Rat(1, 2));
    RUnit v = RUnit::from_tangent_half(2 * rng.uniform_rat(10) - 1);
    Rat width = rng.uniform_rat(10);
    bool exact = cone_contains_exact(w.v, width, v.v, false);
    bool direct = w.dot(v) >= 1 - width;
    CHECK(exact == direct);
  }
}

TEST_CASE("strip signed offset") {
  // horizontal line through the origin
  Line l(RVec(Rat(0), Rat(0)), RUnit(RVec(Rat(1), Rat(0))));
  Strip s(l, Rat(1, 2));
  CHECK(s.signed_offset(RVec(Rat(5), Rat(0))) == 0);
  CHECK(s.signed_offset(RVec(Rat(3), Rat(1, 5))) == Rat(1, 5));
  // invariance along the direction
  Rng rng(14);
  for (int i = 0; i < 100; ++i) {
    RVec z(rng.uniform_rat(8), rng.uniform_rat(8));
    Rat t = 8 * rng.uniform_rat(8) - 4;
    CHECK(s.signed_offset(z) == s.signed_offset(z + l.dir.v * t));
  }
  CHECK(strip_signed_offset(s, Vec2(3, 0.2)) == doctest::Approx(0.2));
}

TEST_CASE("strip membership matches |offset| < rho") {
  Line l(RVec(Rat(1, 4), Rat(1, 3)), RUnit::from_tangent_half(Rat(1, 10)));
  Strip s(l, Rat(1, 7));
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    RVec z(rng.uniform_rat(12), rng.uniform_rat(12));
    CHECK(s.contains(z) == (rat_abs(s.signed_offset(z)) < s.half_width));
  }
  // boundary lines carry the points at offset exactly +-rho
  RVec n = l.dir.perp().v;
  RVec on_hi = l.base + n * s.half_width;
  CHECK(s.boundary(+1).side(on_hi) == 0);
  CHECK_FALSE(s.contains(on_hi));
}

TEST_CASE("diam_v of simple sets") {
  std::vector<Vec2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(diam_v(square, UnitVec(1, 0)) == doctest::Approx(1));
  double r = std::sqrt(0.5);
  CHECK(diam_v(square, UnitVec(r, r)) == doctest::Approx(std::sqrt(2.0)));
  std::vector<Vec2> pt{{0.3, 0.4}};
  CHECK(diam_v(pt, UnitVec(1, 0)) == 0);
  std::vector<Vec2> empty;
  CHECK_THROWS_AS(diam_v(empty, UnitVec(1, 0)), std::invalid_argument);
}

TEST_CASE("diam_v translation invariance and homogeneity") {
  Rng rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Vec2> poly;
    for (int i = 0; i < 5; ++i)
      poly.emplace_back(rng.uniform(-1, 1), rng.uniform(-1, 1));
    double a = rng.uniform(0, 2 * M_PI);
    UnitVec v(std::cos(a), std::sin(a));
    double base = diam_v(poly, v);
    Vec2 shift(rng.uniform(-3, 3), rng.uniform(-3, 3));
    double scale = rng.uniform(0.1, 4);
    std::vector<Vec2> moved, scaled;
    for (const auto& p : poly) {
      moved.push_back(p + shift);
      scaled.push_back(p * scale);
    }
    CHECK(diam_v(moved, v) == doctest::Approx(base).epsilon(1e-12));
    CHECK(diam_v(scaled, v) == doctest::Approx(base * scale).epsilon(1e-12));
  }
}

TEST_CASE("rational line canonical form") {
  RLine a(Rat(2), Rat(4), Rat(6));
  RLine b(Rat(1), Rat(2), Rat(3));
  CHECK(a == b);
  RLine c(Rat(-1), Rat(-2), Rat(-3));
  CHECK(a == c);
  RLine d(Rat(1, 3), Rat(2, 3), Rat(1));
  CHECK(d == b);
  // intersection of x=1 and y=2
  RLine vx(Rat(1), Rat(0), Rat(1));
  RLine hy(Rat(0), Rat(1), Rat(2));
  auto p = vx.intersect(hy);
  REQUIRE(p.has_value());
  CHECK(p->x == 1);
  CHECK(p->y == 2);
  CHECK_FALSE(vx.intersect(RLine(Rat(2), Rat(0), Rat(5))).has_value());
}

TEST_CASE("tangent half-angle directions are exactly unit") {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    Rat t = 4 * rng.uniform_rat(20) - 2;
    RUnit u = RUnit::from_tangent_half(t);
    CHECK(u.v.norm2() == 1);
    CHECK(u.perp().v.norm2() == 1);
    CHECK(u.v.dot(u.perp().v) == 0);
  }
}
