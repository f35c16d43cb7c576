#include "detectors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace unrect {

std::string witness_to_json(const ChordWitness& w) {
  nlohmann::json j;
  j["z"] = {rat_str(w.z.x), rat_str(w.z.y)};
  j["e"] = {rat_str(w.e.x), rat_str(w.e.y)};
  j["x"] = {rat_str(w.x.x), rat_str(w.x.y)};
  j["y"] = {rat_str(w.y.x), rat_str(w.y.y)};
  j["t"] = rat_str(w.t);
  j["s"] = rat_str(w.s);
  j["defect"] = to_double(w.defect);
  j["defect_exact"] = rat_str(w.defect);
  j["function"] = w.function_id;
  j["depth"] = w.depth;
  return j.dump();
}

ZetaResult zeta_from_restriction(const SegPA& g, const RVec& z,
                                 const RUnit& e) {
  ChordExtrema ex = chord_slope_extrema(g);
  ZetaResult r;
  r.value = ex.max_slope - ex.min_slope;
  ChordWitness& w = r.witness;
  w.z = z;
  w.e = e.v;
  w.x = z + e.v * ex.a_max;
  w.t = ex.b_max - ex.a_max;
  w.y = z + e.v * ex.a_min;
  w.s = ex.b_min - ex.a_min;
  w.defect = r.value;
  return r;
}

ZetaResult zeta(const PwAffine& f, const RVec& z, const Rat& eps,
                const RUnit& e) {
  SegPA g = pa_restrict(f, z, e.v, -eps, eps);
  ZetaResult r = zeta_from_restriction(g, z, e);
  r.witness.function_id = "pwaffine";
  return r;
}

ZetaResult zeta_h(const Construction& c, const RVec& z, const Rat& eps,
                  const RUnit& e, int depth) {
  SegPA g = c.restrict_h(z, e.v, -eps, eps, depth);
  ZetaResult r = zeta_from_restriction(g, z, e);
  r.witness.function_id = "h";
  r.witness.depth = depth;
  return r;
}

ZetaResult zeta_phi(const Construction& c, int k, const RVec& z,
                    const Rat& eps, const RUnit& e) {
  SegPA g = c.restrict_phi(k, z, e.v, -eps, eps);
  ZetaResult r = zeta_from_restriction(g, z, e);
  r.witness.function_id = "phi_" + std::to_string(k);
  r.witness.depth = k;
  return r;
}

std::vector<RUnit> direction_grid(int budget) {
  if (budget < 2) budget = 2;
  std::vector<RUnit> dirs;
  dirs.reserve(size_t(budget));
  // tangent half-angles over [-1, 1] sweep the right half-circle; zeta is
  // symmetric under e -> -e, so this set is a full direction grid
  for (int i = 0; i < budget; ++i) {
    Rat t = Rat(-1) + Rat(2 * i) / Rat(budget - 1);
    dirs.push_back(RUnit::from_tangent_half(t));
  }
  return dirs;
}

namespace {

template <typename ZetaFn>
UpsilonResult upsilon_over(const std::vector<RUnit>& dirs, ZetaFn&& fn) {
  UpsilonResult best;
  bool first = true;
  for (const RUnit& e : dirs) {
    ZetaResult r = fn(e);
    ++best.directions_tried;
    if (first || r.value > best.value) {
      best.value = r.value;
      best.argmax = e;
      best.witness = r.witness;
      first = false;
    }
  }
  return best;
}

}  // namespace

UpsilonResult upsilon_h(const Construction& c, const RVec& z, const Rat& eps,
                        int direction_budget, int depth) {
  std::vector<RUnit> dirs = direction_grid(direction_budget);
  // critical directions of the schedule
  dirs.push_back(c.schedule().w);
  dirs.push_back(c.schedule().w.perp());
  for (int k = 1; k <= depth; ++k) {
    dirs.push_back(c.schedule().stages[size_t(k - 1)].e);
    dirs.push_back(c.schedule().stages[size_t(k - 1)].e.perp());
  }
  return upsilon_over(dirs, [&](const RUnit& e) {
    return zeta_h(c, z, eps, e, depth);
  });
}

UpsilonResult upsilon(const PwAffine& f, const RVec& z, const Rat& eps,
                      int direction_budget) {
  std::vector<RUnit> dirs = direction_grid(direction_budget);
  return upsilon_over(dirs, [&](const RUnit& e) { return zeta(f, z, eps, e); });
}

ProbeResult directional_derivative_probe(const Construction& c, const RVec& z,
                                         const RUnit& e,
                                         const std::vector<Rat>& eps_sequence,
                                         const Rat& tolerance, int depth) {
  ProbeResult out;
  for (size_t i = 0; i < eps_sequence.size(); ++i) {
    if (i > 0 && !(eps_sequence[i] < eps_sequence[i - 1]))
      throw std::invalid_argument("eps sequence must strictly decrease");
    ZetaResult r = zeta_h(c, z, eps_sequence[i], e, depth);
    out.scales.push_back(eps_sequence[i]);
    out.values.push_back(r.value);
    if (r.value > out.limsup_estimate) out.limsup_estimate = r.value;
  }
  out.derivative_consistent =
      !out.values.empty() && out.values.back() <= tolerance;
  return out;
}

ChordWitness nondiff_witness_phi(const Construction& c, int k, const RVec& z,
                                 RUnit v) {
  const StripSchedule& s = c.schedule();
  const Stage& st = s.stages[size_t(k - 1)];

  Rat off = c.strip_offset(k, z);
  if (!(rat_abs(off) < st.rho))
    throw WitnessPrecondition("z not in the open strip of stage " +
                              std::to_string(k));
  if (c.in_guard_ball(k, z))
    throw WitnessPrecondition("z inside a guard ball of stage " +
                              std::to_string(k));
  // v outside the double cone C^(w, 3 sqrt(eta)):
  // 1 - |<v,w>| > 3 sqrt(eta), checked on squares
  {
    Rat dw = rat_abs(v.v.dot(s.w.v));
    Rat gap = 1 - dw;
    if (!(gap > 0) || !(gap * gap > 9 * s.eta))
      throw WitnessPrecondition("direction inside the excluded double cone");
  }

  RVec n = st.e.perp().v;
  Rat denom = v.v.dot(n);
  // the cone exclusions force a transversal crossing
  if (denom == 0)
    throw WitnessPrecondition("direction parallel to the stage line");
  Rat tau = off / denom;
  if (tau < 0) {
    v = v.negate();
    denom = -denom;
    tau = -tau;
  }
  RVec u = z - v.v * tau;

  Rat t1 = st.rho / rat_abs(denom);
  Rat t2 = 2 * t1;

  // range guarantees for the crossing offsets, re-derived exactly
  if (!(t1 >= st.rho)) throw std::logic_error("witness: t1 < rho");
  if (!(t1 * t1 * s.eta <= st.rho * st.rho))
    throw std::logic_error("witness: t1 beyond rho/sqrt(eta)");

  Rat p0 = c.phi_value(k, u);
  Rat p1 = c.phi_value(k, u + v.v * t1);
  Rat p2 = c.phi_value(k, u + v.v * t2);
  Rat defect = rat_abs((p1 - p0) / t1 - (p2 - p0) / t2);

  ChordWitness w;
  w.z = z;
  w.e = v.v;
  w.x = u;
  w.y = u;
  w.t = t1;
  w.s = t2;
  w.defect = defect;
  w.function_id = "phi_" + std::to_string(k);
  w.depth = k;
  return w;
}

HWitness nondiff_witness_h(const Construction& c, const RVec& z, RUnit v,
                           const Rat& eps, int depth) {
  const StripSchedule& s = c.schedule();
  Construction::PointState ps = c.evaluate(z, depth);
  int m_depth = ps.m[size_t(depth)];

  int stage = 0;
  for (auto it = ps.k_list.rbegin(); it != ps.k_list.rend(); ++it) {
    int k = *it;
    const Stage& st = s.stages[size_t(k - 1)];
    if (c.in_guard_ball(k, z)) continue;
    // 2 rho_k / sqrt(eta) < eps
    if (!(4 * st.rho * st.rho < s.eta * eps * eps)) continue;
    // the growth counter must have reached its depth ceiling before k
    if (ps.m[size_t(k - 1)] != m_depth) continue;
    stage = k;
    break;
  }
  if (stage == 0)
    throw WitnessPrecondition(
        "no admissible lift stage below this depth: increase K or eps");

  HWitness out;
  out.stage = stage;
  out.m_tilde = m_depth;

  ChordWitness pw = nondiff_witness_phi(c, stage, z, v);
  out.stage_defect = pw.defect;

  const RVec& u = pw.x;
  const RVec dir = pw.e;
  Rat t1 = pw.t, t2 = pw.s;

  auto hval = [&](const RVec& q) { return c.h_value(q, depth); };
  Rat h0 = hval(u);
  Rat h1 = hval(u + dir * t1);
  Rat h2 = hval(u + dir * t2);
  Rat defect = rat_abs((h1 - h0) / t1 - (h2 - h0) / t2);

  // base partial sum measured on the same chords (affine there under a
  // validated schedule, hence zero)
  {
    auto hk1 = [&](const RVec& q) { return c.h_value(q, stage - 1); };
    Rat b0 = hk1(u), b1 = hk1(u + dir * t1), b2 = hk1(u + dir * t2);
    out.base_defect = rat_abs((b1 - b0) / t1 - (b2 - b0) / t2);
  }

  Rat tail = c.h_tail_bound(depth) * pow2(-m_depth);
  out.tail_slack = tail * (2 / t1 + 2 / t2);

  // sqrt(eta), exactly when eta is a rational square
  Rat sqrt_eta;
  {
    Rat lower = sqrt_lower(s.eta);
    sqrt_eta = (lower * lower == s.eta) ? lower : sqrt_upper(s.eta);
  }
  out.bound = pow2(-m_depth) * sqrt_eta / 4 - out.tail_slack;
  out.pass = defect >= out.bound;

  out.witness.z = z;
  out.witness.e = dir;
  out.witness.x = u;
  out.witness.y = u;
  out.witness.t = t1;
  out.witness.s = t2;
  out.witness.defect = defect;
  out.witness.function_id = "h";
  out.witness.depth = depth;
  return out;
}

Rat perturbation_stability(const ChordWitness& w, const Rat& theta) {
  if (theta < 0) throw std::invalid_argument("theta must be >= 0");
  Rat m = std::min(rat_abs(w.t), rat_abs(w.s));
  return w.defect - 4 * theta / m;
}

}  // namespace unrect
