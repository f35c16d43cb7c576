#include "construction.hpp"

#include <algorithm>
#include <cmath>

namespace unrect {

Construction::Construction(StripSchedule sched, int depth)
    : sched_(std::move(sched)), depth_(depth) {
  if (depth_ < 1 || depth_ > sched_.depth)
    throw std::invalid_argument("depth outside schedule range");
  wperp_ = sched_.w.perp().v;

  for (int k = 1; k <= depth_; ++k) {
    const Stage& st = sched_.stages[size_t(k - 1)];
    StagePre p;
    p.eperp = st.e.perp().v;
    p.off_base = st.x.dot(p.eperp);
    p.we = sched_.w.dot(st.e);
    if (!(p.we > 0))
      throw std::invalid_argument("<w, e_k> <= 0: direction outside cone");
    p.top = 2 * st.rho / p.we;
    // ramp: (offset(z) + rho)/<w,e>; gradient = eperp/<w,e>
    p.ramp.gx = p.eperp.x / p.we;
    p.ramp.gy = p.eperp.y / p.we;
    p.ramp.b = (st.rho - p.off_base) / p.we;
    p.ramp_grad = RVec(p.ramp.gx, p.ramp.gy);
    p.scale = pow2(-k);
    pre_.push_back(std::move(p));

    Strip strip = st.strip();
    for (int sgn : {-1, +1}) {
      WedgeLine wl;
      wl.line = strip.boundary(sgn);
      Rat n2 = wl.line.norm2();
      Int root = isqrt_ceil(n2.get_num());
      wl.r = (Rat(root * root) == n2) ? Rat(root) : sqrt_upper(n2);
      wl.stage = k;
      wedges_.push_back(std::move(wl));
    }
  }
}

Rat Construction::strip_offset(int k, const RVec& z) const {
  return z.dot(pre_[size_t(k - 1)].eperp) - pre_[size_t(k - 1)].off_base;
}

bool Construction::in_strip(int k, const RVec& z) const {
  return rat_abs(strip_offset(k, z)) < sched_.stages[size_t(k - 1)].rho;
}

bool Construction::in_guard_ball(int k, const RVec& z) const {
  const Stage& st = sched_.stages[size_t(k - 1)];
  Rat d2 = st.delta * st.delta;
  for (const RVec& s : st.crossings)
    if ((z - s).norm2() < d2) return true;
  return false;
}

Rat Construction::phi_tilde_value(int k, const RVec& z) const {
  const StagePre& p = pre_[size_t(k - 1)];
  const Rat& rho = sched_.stages[size_t(k - 1)].rho;
  Rat off = z.dot(p.eperp) - p.off_base;
  if (off <= -rho) return Rat(0);
  if (off >= rho) return p.top;
  return p.ramp.eval(z);
}

std::optional<Rat> Construction::dist_term(int k, const RVec& z) const {
  bool any = false;
  Rat best;
  for (const WedgeLine& w : wedges_) {
    if (w.stage >= k) break;
    Rat v = rat_abs(w.line.eval(z)) / w.r;
    if (!any || v < best) {
      best = v;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  return pre_[size_t(k - 1)].scale * best;
}

Rat Construction::phi_value(int k, const RVec& z) const {
  Rat ft = phi_tilde_value(k, z);
  auto d = dist_term(k, z);
  if (!d) return ft;
  return std::min(ft, *d);
}

namespace {

struct Branch {
  Rat value;
  RVec grad;
  bool kink;  // gradient undefined at the evaluation point
};

}  // namespace

Construction::PointState Construction::evaluate(const RVec& z,
                                                int depth) const {
  if (depth < 0 || depth > depth_)
    throw std::invalid_argument("evaluate: bad depth");
  PointState ps;
  ps.z = z;
  ps.sigma.assign(size_t(depth) + 1, -1);
  ps.m.assign(size_t(depth) + 1, 0);
  ps.h.assign(size_t(depth) + 1, Rat(0));
  ps.dh.assign(size_t(depth) + 1, RVec());
  ps.phi.reserve(size_t(depth));
  ps.dphi.reserve(size_t(depth));

  for (int k = 1; k <= depth; ++k) {
    const StagePre& p = pre_[size_t(k - 1)];
    const Stage& st = sched_.stages[size_t(k - 1)];

    Rat off = z.dot(p.eperp) - p.off_base;
    Rat aoff = rat_abs(off);
    bool inside = aoff < st.rho;
    bool on_boundary = aoff == st.rho;

    // capped ramp branch
    Branch tilde;
    if (on_boundary) {
      tilde.value = (off > 0) ? p.top : Rat(0);
      tilde.kink = true;
    } else if (inside) {
      tilde.value = p.ramp.eval(z);
      tilde.grad = p.ramp_grad;
      tilde.kink = false;
    } else {
      tilde.value = (off > 0) ? p.top : Rat(0);
      tilde.grad = RVec();
      tilde.kink = false;
    }

    // scaled near-distance branch over earlier boundary lines
    Branch dist;
    bool have_dist = false;
    {
      bool tie = false;
      Rat best;
      const WedgeLine* argmin = nullptr;
      int best_sign = 0;
      for (const WedgeLine& w : wedges_) {
        if (w.stage >= k) break;
        Rat e = w.line.eval(z);
        int sgn = e > 0 ? 1 : (e < 0 ? -1 : 0);
        Rat v = (sgn >= 0 ? e : Rat(-e)) / w.r;
        if (!argmin || v < best) {
          best = v;
          argmin = &w;
          best_sign = sgn;
          tie = false;
        } else if (v == best) {
          tie = true;
        }
      }
      if (argmin) {
        have_dist = true;
        dist.value = p.scale * best;
        dist.kink = tie || best_sign == 0;
        if (!dist.kink) {
          Rat f = p.scale * Rat(best_sign) / argmin->r;
          dist.grad = RVec(f * Rat(argmin->line.a), f * Rat(argmin->line.b));
        }
      }
    }

    // phi_k = min of the two branches
    Branch phi;
    if (!have_dist) {
      phi = tilde;
    } else if (tilde.value < dist.value) {
      phi = tilde;
    } else if (dist.value < tilde.value) {
      phi = dist;
    } else {
      phi.value = tilde.value;
      phi.kink = true;
    }

    if (phi.kink && ps.first_kink == 0) ps.first_kink = k;

    if (inside) ps.k_list.push_back(k);
    ps.sigma[size_t(k)] = inside ? -ps.sigma[size_t(k - 1)]
                                 : ps.sigma[size_t(k - 1)];
    Rat weight = pow2(-ps.m[size_t(k - 1)]) * Rat(ps.sigma[size_t(k - 1)]);
    ps.h[size_t(k)] = ps.h[size_t(k - 1)] + weight * phi.value;
    ps.phi.push_back(phi.value);

    bool grads_ok = ps.first_kink == 0;
    if (grads_ok) {
      ps.dphi.push_back(phi.grad);
      ps.dh[size_t(k)] = ps.dh[size_t(k - 1)] + phi.grad * weight;
      // growth rule: bump the counter when the gradient moved by more than
      // eps since the last bump
      int j = ps.j_last(k);
      RVec diff = ps.dh[size_t(k)] - ps.dh[size_t(j)];
      Rat eps = sched_.eps(ps.m[size_t(k - 1)]);
      if (diff.norm2() > eps * eps)
        ps.m[size_t(k)] = ps.m[size_t(k - 1)] + 1;
      else
        ps.m[size_t(k)] = ps.m[size_t(k - 1)];
    } else {
      ps.dphi.push_back(RVec());
      ps.dh[size_t(k)] = ps.dh[size_t(k - 1)];
      ps.m[size_t(k)] = ps.m[size_t(k - 1)];
    }
  }
  return ps;
}

Rat Construction::h_value(const RVec& z, int depth) const {
  return evaluate(z, depth).h[size_t(depth)];
}

RVec Construction::h_gradient(const RVec& z, int depth) const {
  PointState ps = evaluate(z, depth);
  if (!ps.gradients_valid(depth)) {
    // collect one-sided gradients by nudging off the kink is not exact;
    // report the kink stage through the error instead
    throw OnLineGradient({});
  }
  return ps.dh[size_t(depth)];
}

Rat Construction::h_tail_bound(int depth) const {
  return 2 * sched_.rho_tail(depth) / (1 - sched_.eta);
}

RVec Construction::phi_gradient(int k, const RVec& z) const {
  PointState ps = evaluate(z, k);
  if (ps.first_kink != 0 && ps.first_kink == k) throw OnLineGradient({});
  return ps.dphi[size_t(k - 1)];
}

Construction::Classification Construction::classify(
    const RVec& z, int growth_threshold) const {
  PointState ps = evaluate(z, depth_);
  Classification c;
  c.k_list = ps.k_list;
  c.m_depth = ps.m[size_t(depth_)];
  int tail_lo = (depth_ + 1) / 2;
  for (int k : ps.k_list)
    if (k >= tail_lo) c.in_E_proxy = true;
  for (int k = tail_lo; k <= depth_; ++k)
    if (in_guard_ball(k, z)) {
      c.in_G_proxy = true;
      break;
    }
  c.H_candidate_proxy =
      c.in_E_proxy && !c.in_G_proxy && c.m_depth >= growth_threshold;
  return c;
}

// ---------------------------------------------------------------------------
// segment restriction

namespace {

// roots of the affine map t -> num0 + t*num1 (single root when num1 != 0)
void push_root(std::vector<Rat>& ts, const Rat& num0, const Rat& num1,
               const Rat& lo, const Rat& hi) {
  if (num1 == 0) return;
  Rat t = -num0 / num1;
  if (t > lo && t < hi) ts.push_back(t);
}

}  // namespace

SegPA Construction::restrict_h(const RVec& z, const RVec& dir, const Rat& lo,
                               const Rat& hi, int depth) const {
  if (!(lo < hi)) throw std::invalid_argument("restrict_h: empty range");
  std::vector<Rat> ts{lo, hi};
  if (lo < 0 && 0 < hi) ts.push_back(Rat(0));

  // strip boundary crossings for every stage
  for (int k = 1; k <= depth; ++k) {
    const StagePre& p = pre_[size_t(k - 1)];
    const Rat& rho = sched_.stages[size_t(k - 1)].rho;
    Rat o0 = z.dot(p.eperp) - p.off_base;
    Rat o1 = dir.dot(p.eperp);
    push_root(ts, o0 - rho, o1, lo, hi);
    push_root(ts, o0 + rho, o1, lo, hi);
  }

  // wedge structure: sign roots, pairwise ties, and ramp/cap switches
  size_t nw = wedges_.size();
  std::vector<Rat> u0(nw), u1(nw);
  for (size_t i = 0; i < nw; ++i) {
    u0[i] = wedges_[i].line.eval(z) / wedges_[i].r;
    u1[i] = (Rat(wedges_[i].line.a) * dir.x + Rat(wedges_[i].line.b) * dir.y) /
            wedges_[i].r;
  }
  for (size_t i = 0; i < nw; ++i) {
    push_root(ts, u0[i], u1[i], lo, hi);
    for (size_t j = i + 1; j < nw; ++j) {
      push_root(ts, u0[i] - u0[j], u1[i] - u1[j], lo, hi);
      push_root(ts, u0[i] + u0[j], u1[i] + u1[j], lo, hi);
    }
  }
  for (int k = 1; k <= depth; ++k) {
    const StagePre& p = pre_[size_t(k - 1)];
    // ramp(t) and cap values against each scaled wedge branch
    Rat ramp0 = p.ramp.eval(z);
    Rat ramp1 = p.ramp.gx * dir.x + p.ramp.gy * dir.y;
    for (size_t i = 0; i < nw; ++i) {
      if (wedges_[i].stage >= k) break;
      for (int sgn : {+1, -1}) {
        Rat b0 = p.scale * Rat(sgn) * u0[i];
        Rat b1 = p.scale * Rat(sgn) * u1[i];
        push_root(ts, ramp0 - b0, ramp1 - b1, lo, hi);
        push_root(ts, p.top - b0, -b1, lo, hi);
        push_root(ts, -b0, -b1, lo, hi);  // 0-level (same as sign root)
      }
    }
  }

  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  SegPA out;
  out.nodes = std::move(ts);
  out.values.reserve(out.nodes.size());
  for (const Rat& t : out.nodes)
    out.values.push_back(h_value(z + dir * t, depth));

  // defensive refinement: the candidate set is complete by construction,
  // but verify affinity on each interval and split if a midpoint disagrees
  for (int pass = 0; pass < 4; ++pass) {
    std::vector<Rat> extra;
    for (size_t i = 0; i + 1 < out.nodes.size(); ++i) {
      Rat mid = (out.nodes[i] + out.nodes[i + 1]) / 2;
      Rat expect = (out.values[i] + out.values[i + 1]) / 2;
      if (h_value(z + dir * mid, depth) != expect) extra.push_back(mid);
    }
    if (extra.empty()) break;
    for (const Rat& t : extra) {
      auto it = std::lower_bound(out.nodes.begin(), out.nodes.end(), t);
      size_t idx = size_t(it - out.nodes.begin());
      out.nodes.insert(it, t);
      out.values.insert(out.values.begin() + long(idx),
                        h_value(z + dir * t, depth));
    }
  }
  return out;
}

SegPA Construction::restrict_phi(int k, const RVec& z, const RVec& dir,
                                 const Rat& lo, const Rat& hi) const {
  if (!(lo < hi)) throw std::invalid_argument("restrict_phi: empty range");
  std::vector<Rat> ts{lo, hi};
  if (lo < 0 && 0 < hi) ts.push_back(Rat(0));

  const StagePre& p = pre_[size_t(k - 1)];
  const Rat& rho = sched_.stages[size_t(k - 1)].rho;
  Rat o0 = z.dot(p.eperp) - p.off_base;
  Rat o1 = dir.dot(p.eperp);
  push_root(ts, o0 - rho, o1, lo, hi);
  push_root(ts, o0 + rho, o1, lo, hi);

  Rat ramp0 = p.ramp.eval(z);
  Rat ramp1 = p.ramp.gx * dir.x + p.ramp.gy * dir.y;
  for (size_t i = 0; i < wedges_.size(); ++i) {
    if (wedges_[i].stage >= k) break;
    Rat u0 = wedges_[i].line.eval(z) / wedges_[i].r;
    Rat u1 = (Rat(wedges_[i].line.a) * dir.x + Rat(wedges_[i].line.b) * dir.y) /
             wedges_[i].r;
    push_root(ts, u0, u1, lo, hi);
    for (size_t j = 0; j < i; ++j) {
      if (wedges_[j].stage >= k) break;
      Rat v0 = wedges_[j].line.eval(z) / wedges_[j].r;
      Rat v1 = (Rat(wedges_[j].line.a) * dir.x +
                Rat(wedges_[j].line.b) * dir.y) /
               wedges_[j].r;
      push_root(ts, u0 - v0, u1 - v1, lo, hi);
      push_root(ts, u0 + v0, u1 + v1, lo, hi);
    }
    for (int sgn : {+1, -1}) {
      Rat b0 = p.scale * Rat(sgn) * u0;
      Rat b1 = p.scale * Rat(sgn) * u1;
      push_root(ts, ramp0 - b0, ramp1 - b1, lo, hi);
      push_root(ts, p.top - b0, -b1, lo, hi);
    }
  }

  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  SegPA out;
  out.nodes = std::move(ts);
  out.values.reserve(out.nodes.size());
  for (const Rat& t : out.nodes) out.values.push_back(phi_value(k, z + dir * t));
  return out;
}

// ---------------------------------------------------------------------------
// local audits

Window Construction::stage_window(int k) const {
  const Stage& st = sched_.stages[size_t(k - 1)];
  // Audit a stretch of the strip around one crossing cluster (or the strip
  // midsection when the stage crosses nothing). The window spans a few
  // guard radii lengthwise, which contains the whole near-distance
  // switching zone plus pure-ramp stretches on both sides; the full slab
  // would drag in quadratically many shallow kink lines from distant
  // clusters at later stages.
  RVec center = st.x;
  if (!st.crossings.empty()) center = st.crossings[0];
  if (center.x < Rat(-1, 4) || center.x > Rat(5, 4)) center = st.x;
  Rat hl = 4 * st.delta;
  Rat switching = pow2(k + 6) * st.rho / (1 - sched_.eta);
  if (hl < switching) hl = switching;
  if (hl > Rat(3, 4)) hl = Rat(3, 4);
  if (hl < st.rho * 256) hl = st.rho * 256;
  Rat xlo = center.x - hl, xhi = center.x + hl;
  // y along the line at the window ends (e.x > 0 inside the cone)
  Rat t0 = (xlo - st.x.x) / st.e.v.x;
  Rat t1 = (xhi - st.x.x) / st.e.v.x;
  Rat y0 = st.x.y + t0 * st.e.v.y;
  Rat y1 = st.x.y + t1 * st.e.v.y;
  Rat ylo = std::min(y0, y1), yhi = std::max(y0, y1);
  Rat margin = st.rho * (pow2(k + 2) / (1 - sched_.eta) + 4);
  return Window(xlo, ylo - margin, xhi, yhi + margin);
}

Construction::StageAudit Construction::audit_stage(int k, int line_cap) const {
  StageAudit audit;
  audit.k = k;
  audit.window = stage_window(k);

  const StagePre& p = pre_[size_t(k - 1)];
  const Stage& st = sched_.stages[size_t(k - 1)];

  // explicit capped ramp on the window
  PwAffine tilde;
  {
    Strip strip = st.strip();
    std::vector<RLine> lines{strip.boundary(+1), strip.boundary(-1)};
    tilde.arr = Arrangement::build(lines, audit.window, line_cap);
    tilde.pieces.reserve(tilde.arr->cells().size());
    for (const auto& c : tilde.arr->cells()) {
      Rat off = c.sample.dot(p.eperp) - p.off_base;
      if (off <= -st.rho)
        tilde.pieces.push_back(AffinePiece{Rat(0), Rat(0), Rat(0)});
      else if (off >= st.rho)
        tilde.pieces.push_back(AffinePiece{Rat(0), Rat(0), p.top});
      else
        tilde.pieces.push_back(p.ramp);
    }
  }

  std::vector<RLine> earlier;
  for (const WedgeLine& w : wedges_) {
    if (w.stage >= k) break;
    earlier.push_back(w.line);
  }
  PwAffine dist = pa_dist_to_lines(earlier, p.scale, audit.window);
  audit.phi = pa_min(tilde, dist);
  return audit;
}

int Construction::strip_component_count(int k) const {
  Window w = stage_window(k);
  std::vector<RLine> lines;
  const Stage& st = sched_.stages[size_t(k - 1)];
  Strip strip = st.strip();
  lines.push_back(strip.boundary(+1));
  lines.push_back(strip.boundary(-1));
  for (const WedgeLine& wl : wedges_) {
    if (wl.stage >= k) break;
    lines.push_back(wl.line);
  }
  auto arr = Arrangement::build(lines, w);
  int count = 0;
  for (const auto& c : arr->cells())
    if (in_strip(k, c.sample)) ++count;
  return count;
}

double Construction::measured_lipschitz(int depth, int grid,
                                        std::uint64_t seed) const {
  Rng rng(seed);
  double best = 0;
  auto probe = [&](const RVec& z) {
    PointState ps = evaluate(z, depth);
    if (!ps.gradients_valid(depth)) return;
    best = std::max(best, std::sqrt(to_double(ps.dh[size_t(depth)].norm2())));
  };
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      // jittered so the cloud misses arrangement lines almost surely
      Rat x = (Rat(i) + rng.uniform_rat(24)) / Rat(grid);
      Rat y = (Rat(j) + rng.uniform_rat(24)) / Rat(grid);
      probe(RVec(x, y));
    }
  }
  // in-strip samples: later strips are far below grid resolution
  for (int k = 1; k <= depth; ++k) {
    const Stage& st = sched_.stages[size_t(k - 1)];
    for (int i = 0; i < 32; ++i) {
      Rat t = rng.uniform_rat(Rat(0), Rat(1), 24);
      Rat off = st.rho * (2 * rng.uniform_rat(24) - 1) * Rat(9, 10);
      RVec z = st.x + st.e.v * ((t - st.x.x) / st.e.v.x) +
               pre_[size_t(k - 1)].eperp * off;
      probe(z);
    }
  }
  return best;
}

}  // namespace unrect
