#pragma once

#include "construction.hpp"
#include "curves.hpp"
#include "pwaffine.hpp"
#include "schedule.hpp"

#include <vector>

namespace unrect::testing {

// random affine function with small rational coefficients
inline PwAffine random_affine(Rng& rng, Window w = Window()) {
  auto coef = [&]() -> Rat { return 4 * rng.uniform_rat(8) - 2; };
  return PwAffine::affine(coef(), coef(), coef(), w);
}

// min-fold of `pieces` random affine functions: a concave piecewise-affine
// function with at most pieces*(pieces-1)/2 kink lines
inline PwAffine random_pa(Rng& rng, int pieces, Window w = Window()) {
  PwAffine f = random_affine(rng, w);
  for (int i = 1; i < pieces; ++i) f = pa_min(f, random_affine(rng, w));
  return f;
}

// |x| as an explicit two-piece function
inline PwAffine abs_x(Window w = Window()) {
  std::vector<RLine> lines{RLine(Rat(1), Rat(0), Rat(0))};
  PwAffine f;
  f.arr = Arrangement::build(lines, w);
  for (const auto& c : f.arr->cells()) {
    if (c.sample.x > 0)
      f.pieces.push_back(AffinePiece{Rat(1), Rat(0), Rat(0)});
    else
      f.pieces.push_back(AffinePiece{Rat(-1), Rat(0), Rat(0)});
  }
  return f;
}

// axis-aligned dyadic schedule: horizontal stage lines through the given
// heights; every coordinate double-representable. Not validated.
inline StripSchedule axis_schedule(const std::vector<Rat>& heights,
                                   const Rat& rho0) {
  StripSchedule s;
  s.w = RUnit(RVec(Rat(1), Rat(0)));
  s.eta = Rat(1, 16);
  s.depth = int(heights.size());
  for (int k = 1; k <= s.depth; ++k) {
    Stage st;
    st.x = RVec(Rat(1, 2), heights[size_t(k - 1)]);
    st.e = RUnit(RVec(Rat(1), Rat(0)));
    st.rho = rho0 * rat_pow(Rat(1, 4), unsigned(k - 1));
    s.stages.push_back(std::move(st));
  }
  recompute_crossings(s);
  for (int k = 1; k <= s.depth; ++k) {
    Stage& st = s.stages[size_t(k - 1)];
    st.delta = rat_pow(Rat(1, 4), unsigned(k)) /
               Rat(1 + long(st.crossings.size()));
  }
  return s;
}

// Schedule whose lines all pass through one hub, forcing deep strip
// nesting there. Tangent signs alternate so the strip-direction ratios add
// constructively against the alternating sign sequence, and eps(0) is
// lowered so the growth counter actually climbs at the hub.
inline StripSchedule star_schedule(int depth, std::uint64_t seed) {
  StripSchedule s;
  s.w = RUnit(RVec(Rat(1), Rat(0)));
  s.eta = Rat(1, 16);
  s.depth = depth;
  s.eps0 = Rat(1, 4);
  s.rho_rule = std::make_pair(pow2(-5), pow2(-10));
  Rng rng(seed);
  RVec hub(Rat(1, 2), Rat(1, 2));
  for (int k = 1; k <= depth; ++k) {
    Stage st;
    Rat t = Rat(1, 6) + Rat(k) / Rat(200 * depth) + rng.uniform_rat(10) / 4096;
    if (k % 2 == 0) t = -t;
    st.e = RUnit::from_tangent_half(t);
    st.x = hub;
    st.rho = pow2(-5 - 10 * k);
    s.stages.push_back(std::move(st));
  }
  recompute_crossings(s);
  for (int k = 1; k <= depth; ++k) {
    Stage& st = s.stages[size_t(k - 1)];
    st.delta = rat_pow(Rat(1, 4), unsigned(k)) /
               Rat(1 + long(st.crossings.size()));
  }
  return s;
}

// shared default fixture; generated once per process
inline const StripSchedule& default_schedule(int depth = 6) {
  static StripSchedule s = generate_schedule(Rat(1, 16), 12, 20240817);
  (void)depth;
  return s;
}

inline const Construction& default_construction() {
  static Construction c(default_schedule(), 12);
  return c;
}

// gentle curve through the unit square with tangents deep inside C(w, 2eta)
inline C1Curve wavy_curve(std::uint64_t seed, double amplitude = 0.08) {
  Rng rng(seed);
  double y0 = rng.uniform(0.2, 0.8);
  double y1 = y0 + rng.uniform(-0.1, 0.1);
  double m0y = rng.uniform(-amplitude, amplitude);
  double m1y = rng.uniform(-amplitude, amplitude);
  Vec2 p0(-0.25, y0), p1(1.25, y1);
  double dx = p1.x - p0.x;
  return C1Curve::hermite(p0, Vec2(dx, m0y * dx), p1, Vec2(dx, m1y * dx));
}

}  // namespace unrect::testing
