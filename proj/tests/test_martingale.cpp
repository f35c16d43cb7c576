#include "martingale.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace unrect;
using namespace unrect::testing;

namespace {

// synthetic dyadic filtration on [0,1] with 2^depth leaves
Filtration dyadic_filtration(int depth) {
  Filtration f;
  f.p_max = depth;
  int n = 1 << depth;
  for (int i = 0; i <= n; ++i) f.breaks.push_back(double(i) / n);
  for (int i = 0; i < n; ++i) f.k_of.push_back({});
  for (int p = 0; p <= depth; ++p) {
    CurvePartition part;
    part.level = p;
    part.breaks = f.breaks;
    int atoms = 1 << p;
    int span = n / atoms;
    for (int i = 0; i < n; ++i) part.atom_of.push_back(i / span);
    for (int a = 0; a < atoms; ++a) {
      CurveAtom atom;
      atom.length = double(span) / n;
      part.atoms.push_back(atom);
    }
    f.levels.push_back(std::move(part));
  }
  return f;
}

MuV uniform_mu(const Filtration& f) {
  MuV mu;
  mu.v = Vec2(1, 0);
  mu.total = 1;
  mu.c_min = 1;
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i)
    mu.interval_mass.push_back(f.breaks[i + 1] - f.breaks[i]);
  return mu;
}

// binary random-walk martingale: children split +-step around the parent
ProcessSample random_walk_martingale(const Filtration& f, Rng& rng) {
  ProcessSample X;
  X.values.push_back({0.0});
  for (size_t p = 1; p < f.levels.size(); ++p) {
    const auto& prev = X.values[p - 1];
    std::vector<double> cur(f.levels[p].atoms.size());
    for (size_t a = 0; a < cur.size(); ++a) {
      double step = rng.uniform(-1, 1);
      // siblings share the parent; give +step to even children and -step
      // to odd ones so the conditional mean is exactly the parent value
      double parent = prev[a / 2];
      cur[a] = parent + ((a % 2 == 0) ? step : -step);
      if (a % 2 == 1) {
        // re-derive the same step the even sibling used
        cur[a] = 2 * parent - cur[a - 1];
      }
    }
    X.values.push_back(std::move(cur));
  }
  return X;
}

}  // namespace

TEST_CASE("mu_v of a straight curve is normalized Lebesgue") {
  StripSchedule s = axis_schedule({Rat(1, 2)}, Rat(1, 32));
  Construction con(s, 1);
  C1Curve c = C1Curve::segment(Vec2(-0.2, 0.3), Vec2(1.2, 0.65));
  Filtration f = build_filtration(con, c, 2);
  MuV mu = build_mu_v(c, f, UnitVec(1, 0));
  double sum = 0;
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    double len = f.breaks[i + 1] - f.breaks[i];
    CHECK(mu.interval_mass[i] ==
          doctest::Approx(len / c.length()).epsilon(1e-12));
    sum += mu.interval_mass[i];
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));  // mu(I) = 1
  // additivity over disjoint interval sets
  CHECK(mu_v_mass(mu, f, {0}) + mu_v_mass(mu, f, {1}) ==
        doctest::Approx(mu_v_mass(mu, f, {0, 1})).epsilon(1e-12));
}

TEST_CASE("mu_v rejects curves without the positivity margin") {
  StripSchedule s = axis_schedule({Rat(1, 2)}, Rat(1, 32));
  Construction con(s, 1);
  C1Curve c = C1Curve::segment(Vec2(-0.2, 0.3), Vec2(1.2, 0.65));
  Filtration f = build_filtration(con, c, 1);
  CHECK_THROWS_AS(build_mu_v(c, f, UnitVec(0, -1)), std::invalid_argument);
}

TEST_CASE("conditional expectation of constants and of a linear function") {
  StripSchedule s = axis_schedule({Rat(1, 2)}, Rat(1, 32));
  Construction con(s, 1);
  C1Curve c = C1Curve::segment(Vec2(-0.2, 0.3), Vec2(1.2, 0.65));
  Filtration f = build_filtration(con, c, 1);

  auto konst = [](double) { return 3.25; };
  CondExpResult ce = conditional_expectation(konst, f, 1, nullptr);
  for (double v : ce.atom_values) CHECK(v == doctest::Approx(3.25));

  // level 0 is the trivial partition: the plain mean
  auto linear = [](double t) { return t; };
  CondExpResult mean = conditional_expectation(linear, f, 0, nullptr, 64);
  REQUIRE(mean.atom_values.size() == 1);
  CHECK(mean.atom_values[0] ==
        doctest::Approx(c.length() / 2).epsilon(1e-6));

  // per-atom means against the closed-form interval integrals
  CondExpResult split = conditional_expectation(linear, f, 1, nullptr, 64);
  const CurvePartition& part = f.levels[1];
  for (size_t a = 0; a < part.atoms.size(); ++a) {
    double num = 0, den = 0;
    for (int i : part.atoms[a].intervals) {
      double lo = f.breaks[size_t(i)], hi = f.breaks[size_t(i) + 1];
      num += (hi * hi - lo * lo) / 2;
      den += hi - lo;
    }
    CHECK(split.atom_values[a] == doctest::Approx(num / den).epsilon(1e-6));
  }
}

TEST_CASE("tower property of nested conditioning") {
  const Construction& con = default_construction();
  C1Curve c = wavy_curve(31);
  Filtration f = build_filtration(con, c, 4);
  MuV mu = build_mu_v(c, f, UnitVec(1, 0));
  auto X = [](double t) { return std::sin(3 * t) + t * t; };
  CondExpResult fine = conditional_expectation(X, f, 3, &mu, 32);
  CondExpResult coarse = conditional_expectation(X, f, 2, &mu, 32);
  // E[E[X|fine]|coarse] per coarse atom
  const CurvePartition& cp = f.levels[2];
  const CurvePartition& fp = f.levels[3];
  std::vector<double> num(cp.atoms.size(), 0), den(cp.atoms.size(), 0);
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    size_t ca = size_t(cp.atom_of[i]);
    num[ca] += fine.atom_values[size_t(fp.atom_of[i])] * mu.interval_mass[i];
    den[ca] += mu.interval_mass[i];
  }
  for (size_t a = 0; a < num.size(); ++a) {
    if (den[a] <= 0) continue;
    CHECK(num[a] / den[a] ==
          doctest::Approx(coarse.atom_values[a]).epsilon(1e-8));
  }
}

TEST_CASE("conditioned tangent stays in the cone and below unit norm") {
  const Construction& con = default_construction();
  C1Curve c = wavy_curve(33);
  Filtration f = build_filtration(con, c, con.depth());
  Vec2 w(1, 0);
  double cmin = 1 - 2 * to_double(con.schedule().eta);
  for (const auto& level : f.levels) {
    for (const auto& atom : level.atoms) {
      if (atom.length <= 0) continue;
      CHECK(atom.beta.norm() <= 1 + 1e-9);
      CHECK(atom.beta.dot(w) >= cmin - 1e-9);
    }
  }
}

TEST_CASE("ratio process is a martingale under mu_v") {
  const Construction& con = default_construction();
  for (std::uint64_t seed : {35u, 36u}) {
    C1Curve c = wavy_curve(seed);
    Filtration f = build_filtration(con, c, con.depth());
    UnitVec w(1, 0);
    MuV mu = build_mu_v(c, f, w);
    ProcessSample X = ratio_process(f, w);
    CHECK(martingale_residual(X, f, mu) <= 1e-8);

    // the identity chain behind the property, checked directly per atom:
    // integral of <beta_{p+1}, v_perp> over a coarse atom equals the
    // integral of <gamma', v_perp>
    Vec2 wp(0, 1);
    for (size_t p = 0; p + 1 < f.levels.size(); ++p) {
      const CurvePartition& coarse = f.levels[p];
      const CurvePartition& fine = f.levels[p + 1];
      std::vector<double> lhs(coarse.atoms.size(), 0);
      std::vector<Vec2> dg(coarse.atoms.size());
      for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
        size_t ca = size_t(coarse.atom_of[i]);
        const CurveAtom& fa = fine.atoms[size_t(fine.atom_of[i])];
        double len = f.breaks[i + 1] - f.breaks[i];
        lhs[ca] += fa.beta.dot(wp) * len;
        dg[ca] = dg[ca] + (c.eval(f.breaks[i + 1]) - c.eval(f.breaks[i]));
      }
      for (size_t a = 0; a < lhs.size(); ++a)
        CHECK(lhs[a] == doctest::Approx(dg[a].dot(wp)).epsilon(1e-9));
    }
  }
}

TEST_CASE("corrupting one atom is detected by the residual") {
  const Construction& con = default_construction();
  C1Curve c = wavy_curve(37);
  Filtration f = build_filtration(con, c, con.depth());
  UnitVec w(1, 0);
  MuV mu = build_mu_v(c, f, w);
  ProcessSample X = ratio_process(f, w);
  REQUIRE(f.levels.size() >= 3);
  REQUIRE(!X.values[2].empty());
  X.values[2][0] += 0.1;
  double res = martingale_residual(X, f, mu);
  CHECK(res >= 0.01);  // detected well above tolerance
}

TEST_CASE("alternating sums of constants cancel") {
  Filtration f = dyadic_filtration(4);
  MuV mu = uniform_mu(f);
  ProcessSample X;
  for (const auto& level : f.levels)
    X.values.push_back(std::vector<double>(level.atoms.size(), 2.5));
  AltSumReport rep = alternating_sum_check(X, f, mu);
  CHECK(rep.max_l2 <= 1e-12);  // even-length alternating sums vanish
  CHECK(rep.sup_level_l2 == doctest::Approx(2.5));
  CHECK(rep.l2_ok);
  CHECK(rep.max_martingale_residual <= 1e-12);

  ProcessSample zero;
  for (const auto& level : f.levels)
    zero.values.push_back(std::vector<double>(level.atoms.size(), 0.0));
  AltSumReport rz = alternating_sum_check(zero, f, mu);
  CHECK(rz.max_l2 == 0);
  CHECK(rz.l2_ok);
}

TEST_CASE("alternating sums of a synthetic random walk obey the L2 bound") {
  Rng rng(91);
  for (int trial = 0; trial < 10; ++trial) {
    Filtration f = dyadic_filtration(6);
    MuV mu = uniform_mu(f);
    ProcessSample X = random_walk_martingale(f, rng);
    CHECK(martingale_residual(X, f, mu) <= 1e-12);
    AltSumReport rep = alternating_sum_check(X, f, mu);
    CHECK(rep.l2_ok);
    CHECK(rep.submartingale_ok);
    CHECK(rep.max_martingale_residual <= 1e-12);
    CHECK(rep.max_l2 <= 2 * rep.sup_level_l2 + 1e-12);
  }
}

TEST_CASE("tail inequality of the running alternating sums") {
  const Construction& con = default_construction();
  C1Curve straight = C1Curve::segment(Vec2(-0.2, 0.31), Vec2(1.2, 0.34));
  Filtration fs = build_filtration(con, straight, con.depth());
  UnitVec w(1, 0);
  MuV mus = build_mu_v(straight, fs, w);
  DoobReport d1 = doob_tail_check(straight, fs, w, 0.5, mus);
  CHECK(d1.pass);

  C1Curve c = wavy_curve(41);
  Filtration f = build_filtration(con, c, con.depth());
  MuV mu = build_mu_v(c, f, w);
  double prev_bound = 1e300;
  double prev_exceed = 1e300;
  for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
    DoobReport rep = doob_tail_check(c, f, w, lambda, mu);
    CHECK(rep.pass);
    CHECK(rep.bound <= prev_bound);
    CHECK(rep.exceedance <= prev_exceed + 1e-12);
    prev_bound = rep.bound;
    prev_exceed = rep.exceedance;
    // the intermediate measure-change step: mu-bound = 16/c^2 over lambda^2
    CHECK(rep.mu_bound ==
          doctest::Approx(16.0 / (lambda * lambda * mu.c_min * mu.c_min)));
  }
}

TEST_CASE("Markov step of the exceedance estimate") {
  const Construction& con = default_construction();
  C1Curve c = wavy_curve(43);
  Filtration f = build_filtration(con, c, con.depth());
  for (int p = 1; p <= f.p_max; ++p) {
    DpResult dp = dp_diagnostic(con, f, p);
    // L(D_p) <= E|X_p| / 2^-p, numerically
    CHECK(dp.measure <= dp.integral / dp.bound + 1e-12);
  }
}

TEST_CASE("L-infinity to L2 chain for the ratio process") {
  const Construction& con = default_construction();
  C1Curve c = wavy_curve(45);
  Filtration f = build_filtration(con, c, con.depth());
  UnitVec w(1, 0);
  MuV mu = build_mu_v(c, f, w);
  ProcessSample X = ratio_process(f, w);
  double sup = 0;
  for (const auto& level : X.values)
    for (double v : level) sup = std::max(sup, std::abs(v));
  CHECK(sup <= 1.0 / mu.c_min + 1e-9);
  // L2 norms under the probability measure cannot exceed the sup
  for (size_t p = 0; p < X.values.size(); ++p) {
    double s = 0;
    const CurvePartition& part = f.levels[p];
    for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
      double v = X.values[p][size_t(part.atom_of[i])];
      s += v * v * mu.interval_mass[i];
    }
    CHECK(std::sqrt(s) <= sup + 1e-9);
    // with the normalization recorded, the Lebesgue-side norm carries the
    // factor K(gamma)/c
    CHECK(std::sqrt(s) * mu.total / mu.c_min <=
          (mu.total / mu.c_min) * (1.0 / mu.c_min) + 1e-9);
  }
}

TEST_CASE("growth blocks: empty trace off the strips") {
  const Construction& con = default_construction();
  RVec quiet(Rat(1, 3), Rat(31, 32));
  auto blocks = der_grow_diagnostic(con, quiet, con.depth());
  auto ps = con.evaluate(quiet);
  if (ps.growth_stages().empty()) CHECK(blocks.empty());
}

TEST_CASE("growth block bound sequence is eventually unbounded") {
  // 2^n eps(n) - 2 = 2^n / n^2 - 2 grows without bound
  double prev = 0;
  for (int n = 8; n <= 24; ++n) {
    double bound = std::pow(2.0, n) / (n * n) - 2;
    CHECK(bound > prev);
    prev = bound;
  }
  CHECK(prev > 600);
}

TEST_CASE("growth blocks on a hub schedule certify the gradient chain") {
  // every stage line passes through one hub: points microscopically off it
  // sit in all strips (off the kink set) and the counter climbs
  StripSchedule s = star_schedule(10, 5);
  Construction con(s, 10);
  RVec z(Rat(1, 2) + pow2(-110), Rat(1, 2) + pow2(-112));
  auto ps = con.evaluate(z);
  REQUIRE(ps.first_kink == 0);
  REQUIRE(ps.k_list.size() == 10);
  REQUIRE(ps.growth_stages().size() >= 2);
  auto blocks = der_grow_diagnostic(con, z, 10);
  REQUIRE(!blocks.empty());
  int certified = 0;
  for (const auto& blk : blocks) {
    CHECK(blk.r_from < blk.r_to);
    if (blk.chain_certified) {
      ++certified;
      // the certified chain forces the blockwise lower bound
      CHECK(rat_abs(blk.block_sum) >= blk.lower_bound);
    }
  }
  CHECK(certified >= 1);

  // quiet points produce an empty trace
  RVec quiet(Rat(1, 16), Rat(15, 16));
  if (con.evaluate(quiet).growth_stages().empty())
    CHECK(der_grow_diagnostic(con, quiet, 10).empty());
}
