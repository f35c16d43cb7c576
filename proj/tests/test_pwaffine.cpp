#include "pwaffine.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace unrect;
using namespace unrect::testing;

namespace {

RVec random_point(Rng& rng, double span = 4.0, double off = -1.5) {
  Rat s = rat_of_double(span), o = rat_of_double(off);
  return RVec(o + s * rng.uniform_rat(20), o + s * rng.uniform_rat(20));
}

// brute-force chord-slope extrema over a dense endpoint grid (float)
std::pair<double, double> brute_chord_extrema(const PwAffine& f, const RVec& z,
                                              const RUnit& e, double eps,
                                              int n = 2000) {
  auto val = [&](double t) {
    return to_double(pa_eval(f, z + e.v * rat_of_double(t)));
  };
  std::vector<double> ts, vs;
  for (int i = 0; i <= n; ++i) {
    double t = -eps + 2 * eps * i / n;
    ts.push_back(t);
    vs.push_back(val(t));
  }
  double lo = 1e300, hi = -1e300;
  for (size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] > 0) break;
    for (size_t j = ts.size(); j-- > 0;) {
      if (ts[j] < 0) break;
      if (ts[i] == ts[j]) continue;
      double slope = (vs[j] - vs[i]) / (ts[j] - ts[i]);
      lo = std::min(lo, slope);
      hi = std::max(hi, slope);
    }
  }
  return {lo, hi};
}

}  // namespace

TEST_CASE("pa_min is idempotent") {
  Rng rng(31);
  PwAffine f = random_pa(rng, 3);
  PwAffine m = pa_min(f, f);
  CHECK(m.degenerate_overlap);
  for (int i = 0; i < 200; ++i) {
    RVec z = random_point(rng);
    CHECK(pa_eval(m, z) == pa_eval(f, z));
  }
}

TEST_CASE("pa_min of x and -x kinks on the axis") {
  PwAffine f = PwAffine::affine(Rat(1), Rat(0), Rat(0));
  PwAffine g = PwAffine::affine(Rat(-1), Rat(0), Rat(0));
  PwAffine m = pa_min(f, g);
  REQUIRE(m.arr->lines().size() == 1);
  CHECK(m.arr->lines()[0] == RLine(Rat(1), Rat(0), Rat(0)));
  RVec right(Rat(1), Rat(0)), left(Rat(-1), Rat(0));
  CHECK(pa_gradient(m, right) == RVec(Rat(-1), Rat(0)));
  CHECK(pa_gradient(m, left) == RVec(Rat(1), Rat(0)));
  CHECK(pa_eval(m, RVec(Rat(1, 2), Rat(2))) == Rat(-1, 2));
  CHECK_THROWS_AS(pa_gradient(m, RVec(Rat(0), Rat(1))), OnLineGradient);
}

TEST_CASE("pa_min equals the pointwise minimum") {
  Rng rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    PwAffine f = random_pa(rng, 2 + int(rng.below(2)));
    PwAffine g = random_pa(rng, 2 + int(rng.below(2)));
    PwAffine m = pa_min(f, g);
    CHECK(pa_check_continuity(m).ok);
    CHECK(pa_lipschitz2(m) <= std::max(pa_lipschitz2(f), pa_lipschitz2(g)));
    for (int i = 0; i < 50; ++i) {
      RVec z = random_point(rng);
      CHECK(pa_eval(m, z) == std::min(pa_eval(f, z), pa_eval(g, z)));
    }
  }
}

TEST_CASE("pa_min with the sentinel returns the other argument") {
  Rng rng(33);
  PwAffine f = random_pa(rng, 3);
  PwAffine inf = PwAffine::infinity_sentinel();
  PwAffine a = pa_min(inf, f);
  PwAffine b = pa_min(f, inf);
  for (int i = 0; i < 50; ++i) {
    RVec z = random_point(rng);
    CHECK(pa_eval(a, z) == pa_eval(f, z));
    CHECK(pa_eval(b, z) == pa_eval(f, z));
  }
}

TEST_CASE("distance to a single axis line") {
  std::vector<RLine> t{RLine(Rat(0), Rat(1), Rat(0))};  // y = 0
  PwAffine d = pa_dist_to_lines(t, Rat(1));
  CHECK(pa_eval(d, RVec(Rat(2), Rat(0))) == 0);
  CHECK(pa_eval(d, RVec(Rat(1, 3), Rat(3, 4))) == Rat(3, 4));
  CHECK(pa_eval(d, RVec(Rat(1), Rat(-1, 2))) == Rat(1, 2));
  CHECK(pa_gradient(d, RVec(Rat(0), Rat(1))) == RVec(Rat(0), Rat(1)));
  CHECK(pa_gradient(d, RVec(Rat(0), Rat(-1))) == RVec(Rat(0), Rat(-1)));
}

TEST_CASE("distance to two perpendicular lines picks the nearer") {
  std::vector<RLine> t{RLine(Rat(0), Rat(1), Rat(0)),
                       RLine(Rat(1), Rat(0), Rat(0))};
  PwAffine d = pa_dist_to_lines(t, Rat(1));
  CHECK(pa_eval(d, RVec(Rat(2), Rat(1))) == 1);
  CHECK(pa_eval(d, RVec(Rat(1), Rat(2))) == 1);
  CHECK(pa_check_continuity(d).ok);
}

TEST_CASE("distance to random lines matches the per-line minimum") {
  Rng rng(34);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<RLine> lines;
    for (int i = 0; i < 5; ++i) {
      Rat a = 2 * rng.uniform_rat(8) - 1;
      Rat b = 2 * rng.uniform_rat(8) - 1;
      if (a == 0 && b == 0) b = 1;
      lines.emplace_back(a, b, 2 * rng.uniform_rat(8) - 1);
    }
    Rat scale = Rat(1) + rng.uniform_rat(4);
    PwAffine d = pa_dist_to_lines(lines, scale);
    CHECK(pa_check_continuity(d).ok);
    // gradient norm equals `scale` within the certified divisor slack
    double sc = to_double(scale);
    CHECK(std::sqrt(to_double(pa_lipschitz2(d))) ==
          doctest::Approx(sc).epsilon(1e-9));
    for (int i = 0; i < 125; ++i) {
      RVec z = random_point(rng);
      double expect = 1e300;
      for (const auto& l : lines) {
        double av = std::abs(to_double(l.eval(z)));
        expect = std::min(expect, sc * av / std::sqrt(to_double(l.norm2())));
      }
      CHECK(to_double(pa_eval(d, z)) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("pa_eval and pa_gradient on affine functions") {
  Rng rng(35);
  PwAffine f = PwAffine::affine(Rat(2, 3), Rat(-1, 5), Rat(7));
  for (int i = 0; i < 100; ++i) {
    RVec z = random_point(rng);
    CHECK(pa_eval(f, z) == Rat(2, 3) * z.x - Rat(1, 5) * z.y + 7);
    CHECK(pa_gradient(f, z) == RVec(Rat(2, 3), Rat(-1, 5)));
  }
}

TEST_CASE("gradient is constant within a cell") {
  Rng rng(36);
  PwAffine f = random_pa(rng, 4);
  for (int i = 0; i < 1000; ++i) {
    RVec a = random_point(rng);
    auto la = f.arr->locate(a);
    if (!std::holds_alternative<int>(la)) continue;
    const Cell& cell = f.arr->cell(std::get<int>(la));
    // second point: blend towards the sample point, stays in the open cell
    RVec b = a + (cell.sample - a) * rng.uniform_rat(10);
    auto lb = f.arr->locate(b);
    if (!std::holds_alternative<int>(lb) || std::get<int>(lb) != cell.id)
      continue;
    CHECK(pa_gradient(f, a) == pa_gradient(f, b));
  }
}

TEST_CASE("central differences match the exact gradient") {
  Rng rng(37);
  PwAffine f = random_pa(rng, 4);
  int tested = 0;
  for (int i = 0; i < 200 && tested < 50; ++i) {
    RVec z = random_point(rng);
    auto loc = f.arr->locate(z);
    if (!std::holds_alternative<int>(loc)) continue;
    // keep clear of the cell boundary so the stencil stays inside
    const Cell& cell = f.arr->cell(std::get<int>(loc));
    bool clear = true;
    for (const auto& l : f.arr->lines())
      if (to_double(l.dist2(z)) < 1e-4) clear = false;
    (void)cell;
    if (!clear) continue;
    ++tested;
    double h = 1e-7;
    auto val = [&](double x, double y) {
      return to_double(pa_eval(f, RVec(rat_of_double(x), rat_of_double(y))));
    };
    double zx = to_double(z.x), zy = to_double(z.y);
    double gx = (val(zx + h, zy) - val(zx - h, zy)) / (2 * h);
    double gy = (val(zx, zy + h) - val(zx, zy - h)) / (2 * h);
    RVec g = pa_gradient(f, z);
    CHECK(gx == doctest::Approx(to_double(g.x)).epsilon(1e-6));
    CHECK(gy == doctest::Approx(to_double(g.y)).epsilon(1e-6));
  }
  CHECK(tested >= 30);
}

TEST_CASE("chord extrema of an affine restriction collapse to one slope") {
  PwAffine f = PwAffine::affine(Rat(3, 7), Rat(1, 2), Rat(-1));
  RUnit e = RUnit::from_tangent_half(Rat(1, 3));
  SegPA g = pa_restrict(f, RVec(Rat(0), Rat(0)), e.v, Rat(-1, 2), Rat(1, 2));
  ChordExtrema ex = chord_slope_extrema(g);
  Rat expect = RVec(Rat(3, 7), Rat(1, 2)).dot(e.v);
  CHECK(ex.min_slope == expect);
  CHECK(ex.max_slope == expect);
  CHECK(ex.degenerate);
}

TEST_CASE("chord extrema of |x| at the kink are -1 and +1") {
  PwAffine f = abs_x();
  SegPA g = pa_restrict(f, RVec(Rat(0), Rat(0)), RVec(Rat(1), Rat(0)),
                        Rat(-1, 4), Rat(1, 4));
  ChordExtrema ex = chord_slope_extrema(g);
  CHECK(ex.min_slope == -1);
  CHECK(ex.max_slope == 1);
}

TEST_CASE("chord extrema match dense endpoint enumeration") {
  Rng rng(38);
  for (int trial = 0; trial < 10; ++trial) {
    PwAffine f = random_pa(rng, 4);  // at most 6 kink lines
    RVec z = random_point(rng, 1.0, -0.25);
    RUnit e = RUnit::from_tangent_half(2 * rng.uniform_rat(12) - 1);
    Rat eps(1, 2);
    SegPA g = pa_restrict(f, z, e.v, -eps, eps);
    ChordExtrema ex = chord_slope_extrema(g);
    auto [blo, bhi] = brute_chord_extrema(f, z, e, 0.5);
    CHECK(to_double(ex.min_slope) <= blo + 1e-9);
    CHECK(to_double(ex.max_slope) >= bhi - 1e-9);
    // the brute grid catches the extrema up to its resolution
    CHECK(to_double(ex.max_slope) == doctest::Approx(bhi).epsilon(2e-3));
    CHECK(to_double(ex.min_slope) == doctest::Approx(blo).epsilon(2e-3));
    // extrema bounded by the Lipschitz constant
    double lip = std::sqrt(to_double(pa_lipschitz2(f)));
    CHECK(to_double(ex.max_slope) <= lip + 1e-12);
    CHECK(to_double(ex.min_slope) >= -lip - 1e-12);
  }
}
