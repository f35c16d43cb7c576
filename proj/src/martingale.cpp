#include "martingale.hpp"

#include <algorithm>
#include <cmath>

namespace unrect {

MuV build_mu_v(const C1Curve& c, const Filtration& f, const UnitVec& v,
               int grid) {
  MuV mu;
  mu.v = v.vec();
  mu.c_min = 1e300;
  for (int i = 0; i <= grid; ++i) {
    double s = c.length() * i / grid;
    double d = c.deriv(s).dot(mu.v);
    mu.c_min = std::min(mu.c_min, d);
    if (d <= 0)
      throw std::invalid_argument("<gamma', v> not positive at s=" +
                                  std::to_string(s));
  }
  // exact by the fundamental theorem: int <gamma',v> = <gamma(b)-gamma(a), v>
  mu.interval_mass.resize(f.breaks.size() - 1);
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    Vec2 d = c.eval(f.breaks[i + 1]) - c.eval(f.breaks[i]);
    mu.interval_mass[i] = d.dot(mu.v);
    mu.total += mu.interval_mass[i];
  }
  for (auto& m : mu.interval_mass) m /= mu.total;
  return mu;
}

double mu_v_mass(const MuV& mu, const Filtration& f,
                 const std::vector<int>& intervals) {
  (void)f;
  double s = 0;
  for (int i : intervals) s += mu.interval_mass[size_t(i)];
  return s;
}

CondExpResult conditional_expectation(
    const std::function<double(double)>& X, const Filtration& f, int level,
    const MuV* mu, int points_per_interval) {
  const CurvePartition& part = f.levels[size_t(level)];
  CondExpResult out;
  out.atom_values.assign(part.atoms.size(), 0.0);
  std::vector<double> mass(part.atoms.size(), 0.0);
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    int atom = part.atom_of[i];
    double a = f.breaks[i], b = f.breaks[i + 1];
    if (b <= a) continue;
    // midpoint-batch quadrature against the chosen measure
    double acc = 0, w = 0;
    for (int q = 0; q < points_per_interval; ++q) {
      double t = a + (b - a) * (q + 0.5) / points_per_interval;
      double weight = (b - a) / points_per_interval;
      if (mu) weight = mu->interval_mass[i] / points_per_interval;
      acc += X(t) * weight;
      w += weight;
    }
    out.atom_values[size_t(atom)] += acc;
    mass[size_t(atom)] += w;
  }
  for (size_t a = 0; a < mass.size(); ++a) {
    if (mass[a] > 0)
      out.atom_values[a] /= mass[a];
    else
      ++out.dropped_atoms;
  }
  return out;
}

ProcessSample ratio_process(const Filtration& f, const UnitVec& v) {
  ProcessSample X;
  Vec2 vv = v.vec();
  Vec2 vp = v.perp().vec();
  for (const auto& part : f.levels) {
    std::vector<double> vals;
    vals.reserve(part.atoms.size());
    for (const auto& a : part.atoms) {
      double denom = a.beta.dot(vv);
      vals.push_back(a.length > 0 && denom != 0 ? a.beta.dot(vp) / denom : 0.0);
    }
    X.values.push_back(std::move(vals));
  }
  return X;
}

double martingale_residual(const ProcessSample& X, const Filtration& f,
                           const MuV& mu) {
  double worst = 0;
  for (size_t p = 0; p + 1 < f.levels.size(); ++p) {
    const CurvePartition& coarse = f.levels[p];
    const CurvePartition& fine = f.levels[p + 1];
    std::vector<double> num(coarse.atoms.size(), 0.0);
    std::vector<double> den(coarse.atoms.size(), 0.0);
    for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
      int ca = coarse.atom_of[i];
      int fa = fine.atom_of[i];
      num[size_t(ca)] += X.values[p + 1][size_t(fa)] * mu.interval_mass[i];
      den[size_t(ca)] += mu.interval_mass[i];
    }
    for (size_t a = 0; a < num.size(); ++a) {
      if (den[a] <= 0) continue;
      worst = std::max(worst,
                       std::abs(num[a] / den[a] - X.values[p][a]));
    }
  }
  return worst;
}

namespace {

// per-interval value of the alternating sum S_N = sum_{n=0}^{2N-1}(-1)^n X_n
std::vector<double> alt_sum_per_interval(const ProcessSample& X,
                                         const Filtration& f, int N) {
  std::vector<double> s(f.breaks.size() - 1, 0.0);
  for (int n = 0; n < 2 * N && n < int(f.levels.size()); ++n) {
    const CurvePartition& part = f.levels[size_t(n)];
    double sign = (n % 2 == 0) ? 1.0 : -1.0;
    for (size_t i = 0; i < s.size(); ++i)
      s[i] += sign * X.values[size_t(n)][size_t(part.atom_of[i])];
  }
  return s;
}

double l2_norm_per_interval(const std::vector<double>& vals, const MuV& mu) {
  double s = 0;
  for (size_t i = 0; i < vals.size(); ++i)
    s += vals[i] * vals[i] * mu.interval_mass[i];
  return std::sqrt(s);
}

}  // namespace

AltSumReport alternating_sum_check(const ProcessSample& X, const Filtration& f,
                                   const MuV& mu) {
  AltSumReport rep;
  const int P = int(f.levels.size());

  // level L2 norms
  std::vector<double> level_l2(size_t(P), 0.0);
  for (int p = 0; p < P; ++p) {
    const CurvePartition& part = f.levels[size_t(p)];
    double s = 0;
    for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
      double v = X.values[size_t(p)][size_t(part.atom_of[i])];
      s += v * v * mu.interval_mass[i];
    }
    level_l2[size_t(p)] = std::sqrt(s);
    rep.sup_level_l2 = std::max(rep.sup_level_l2, level_l2[size_t(p)]);
  }

  // submartingale step of the proof: int X_{2n-1}^2 <= int X_{2n}^2
  rep.submartingale_ok = true;
  for (int n = 1; 2 * n < P; ++n) {
    double a = level_l2[size_t(2 * n - 1)], b = level_l2[size_t(2 * n)];
    if (a * a > b * b + 1e-12) rep.submartingale_ok = false;
  }

  // alternating sums at every admissible N
  int maxN = P / 2;
  std::vector<std::vector<double>> sums;
  for (int N = 1; N <= maxN; ++N) {
    auto s = alt_sum_per_interval(X, f, N);
    rep.max_l2 = std::max(rep.max_l2, l2_norm_per_interval(s, mu));
    sums.push_back(std::move(s));
  }
  rep.l2_ok = rep.max_l2 <= 2 * rep.sup_level_l2 + 1e-12;

  // martingale residual of (S_N) w.r.t. (Sigma_{2N-1})
  for (int N = 1; N + 1 <= maxN; ++N) {
    const CurvePartition& coarse = f.levels[size_t(2 * N - 1)];
    std::vector<double> num(coarse.atoms.size(), 0.0);
    std::vector<double> den(coarse.atoms.size(), 0.0);
    std::vector<double> cur(coarse.atoms.size(), 0.0);
    std::vector<bool> seen(coarse.atoms.size(), false);
    for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
      size_t ca = size_t(coarse.atom_of[i]);
      num[ca] += sums[size_t(N)][i] * mu.interval_mass[i];  // S_{N+1}
      den[ca] += mu.interval_mass[i];
      cur[ca] = sums[size_t(N - 1)][i];  // S_N constant per coarse atom
      seen[ca] = true;
    }
    for (size_t a = 0; a < num.size(); ++a) {
      if (!seen[a] || den[a] <= 0) continue;
      rep.max_martingale_residual = std::max(
          rep.max_martingale_residual, std::abs(num[a] / den[a] - cur[a]));
    }
  }
  return rep;
}

DoobReport doob_tail_check(const C1Curve& c, const Filtration& f,
                           const UnitVec& v, double lambda, const MuV& mu) {
  (void)c;
  DoobReport rep;
  rep.lambda = lambda;
  ProcessSample X = ratio_process(f, v);
  const int P = int(f.levels.size());
  int maxN = P / 2;

  std::vector<double> running_max(f.breaks.size() - 1, 0.0);
  for (int N = 1; N <= maxN; ++N) {
    auto s = alt_sum_per_interval(X, f, N);
    for (size_t i = 0; i < s.size(); ++i)
      running_max[i] = std::max(running_max[i], std::abs(s[i]));
  }
  for (size_t i = 0; i < running_max.size(); ++i) {
    if (running_max[i] > lambda) {
      rep.exceedance += f.breaks[i + 1] - f.breaks[i];
      rep.mu_exceedance += mu.interval_mass[i];
    }
  }
  double cc = mu.c_min;
  rep.bound = 16.0 * mu.total / (lambda * lambda * cc * cc * cc);
  rep.mu_bound = 16.0 / (lambda * lambda * cc * cc);
  rep.pass = rep.exceedance <= rep.bound + 1e-9 &&
             rep.mu_exceedance <= rep.mu_bound + 1e-9;
  return rep;
}

std::vector<DerGrowBlock> der_grow_diagnostic(const Construction& con,
                                              const RVec& z, int depth) {
  Construction::PointState ps = con.evaluate(z, depth);
  std::vector<int> growth = ps.growth_stages();
  std::vector<DerGrowBlock> out;
  if (growth.empty()) return out;

  const StripSchedule& s = con.schedule();
  const RVec& w = s.w.v;
  RVec wp = s.w.perp().v;

  for (size_t n = 0; n + 1 < growth.size(); ++n) {
    DerGrowBlock blk;
    blk.n = int(n) + 1;  // m reaches n+1 at growth[n]
    blk.r_from = growth[n];
    blk.r_to = growth[n + 1];
    // sum over strip hits k_s in (r_n, r_{n+1}]
    Rat sum(0);
    int sidx = 0;
    for (int k : ps.k_list) {
      ++sidx;  // k = k_sidx
      if (k <= blk.r_from || k > blk.r_to) continue;
      const Stage& st = s.stages[size_t(k - 1)];
      Rat ratio = w.dot(st.e.perp().v) / w.dot(st.e.v);
      sum += (sidx % 2 == 0 ? ratio : -ratio);
    }
    blk.block_sum = sum;
    blk.lower_bound = pow2(blk.n) * s.eps(blk.n) - 2;

    // certify the chain: eps(n) < ||Dh_{r_{n+1}} - Dh_{r_n}|| and
    // ||Dh_{r_{n+1}} - Dh_{r_n}|| <= 2^-n (2 + |block_sum|)
    if (ps.gradients_valid(blk.r_to)) {
      RVec diff = ps.dh[size_t(blk.r_to)] - ps.dh[size_t(blk.r_from)];
      Rat n2 = diff.norm2();
      Rat eps = s.eps(blk.n);
      bool lower_ok = n2 > eps * eps;
      Rat upper = pow2(-blk.n) * (2 + rat_abs(sum));
      bool upper_ok = n2 <= upper * upper;
      blk.chain_certified = lower_ok && upper_ok;
      (void)wp;
    }
    out.push_back(std::move(blk));
  }
  return out;
}

}  // namespace unrect
