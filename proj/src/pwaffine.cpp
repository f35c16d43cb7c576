#include "pwaffine.hpp"

#include <algorithm>
#include <set>

namespace unrect {

namespace {

bool point_in_closed_convex(const std::vector<RVec>& poly, const RVec& z) {
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const RVec& a = poly[i];
    const RVec& b = poly[(i + 1) % n];
    if ((b - a).cross(z - a) < 0) return false;  // ccw polygons
  }
  return true;
}

// cell containing z, boundary included
int closed_cell_of(const Arrangement& arr, const RVec& z) {
  for (const auto& c : arr.cells()) {
    if (point_in_closed_convex(c.poly, z)) return c.id;
  }
  throw std::domain_error("point outside arrangement window");
}

// Sutherland-Hodgman clip of convex polygon `a` against convex polygon `b`
// (both ccw).
std::vector<RVec> convex_intersect(const std::vector<RVec>& a,
                                   const std::vector<RVec>& b) {
  std::vector<RVec> out = a;
  const size_t nb = b.size();
  for (size_t i = 0; i < nb && !out.empty(); ++i) {
    const RVec& p = b[i];
    const RVec& q = b[(i + 1) % nb];
    RVec edge = q - p;
    std::vector<RVec> next;
    const size_t n = out.size();
    for (size_t j = 0; j < n; ++j) {
      const RVec& u = out[j];
      const RVec& v = out[(j + 1) % n];
      Rat su = edge.cross(u - p);
      Rat sv = edge.cross(v - p);
      if (su >= 0) next.push_back(u);
      if ((su > 0 && sv < 0) || (su < 0 && sv > 0)) {
        Rat t = su / (su - sv);
        next.push_back(u + (v - u) * t);
      }
    }
    out = std::move(next);
  }
  return out;
}

Rat polygon_area2(const std::vector<RVec>& poly) {
  Rat s(0);
  for (size_t i = 0; i < poly.size(); ++i)
    s += poly[i].cross(poly[(i + 1) % poly.size()]);
  return rat_abs(s);
}

struct BBox {
  Rat x0, y0, x1, y1;
  static BBox of(const std::vector<RVec>& poly) {
    BBox b{poly[0].x, poly[0].y, poly[0].x, poly[0].y};
    for (const auto& p : poly) {
      b.x0 = std::min(b.x0, p.x);
      b.y0 = std::min(b.y0, p.y);
      b.x1 = std::max(b.x1, p.x);
      b.y1 = std::max(b.y1, p.y);
    }
    return b;
  }
  bool overlaps(const BBox& o) const {
    return !(x1 < o.x0 || o.x1 < x0 || y1 < o.y0 || o.y1 < y0);
  }
};

}  // namespace

PwAffine PwAffine::constant(const Rat& c, Window w) {
  return affine(Rat(0), Rat(0), c, std::move(w));
}

PwAffine PwAffine::affine(const Rat& gx, const Rat& gy, const Rat& b,
                          Window w) {
  PwAffine f;
  f.arr = Arrangement::build({}, std::move(w));
  f.pieces.assign(f.arr->cells().size(), AffinePiece{gx, gy, b});
  return f;
}

Rat pa_eval(const PwAffine& f, const RVec& z) {
  if (f.plus_infinity) throw std::domain_error("pa_eval on +infinity sentinel");
  auto loc = f.arr->locate(z);
  if (std::holds_alternative<int>(loc))
    return f.pieces[size_t(std::get<int>(loc))].eval(z);
  if (std::holds_alternative<LocateOutside>(loc))
    throw std::domain_error("pa_eval outside window");
  // on a line: continuity makes any incident cell's piece valid
  return f.pieces[size_t(closed_cell_of(*f.arr, z))].eval(z);
}

RVec pa_gradient(const PwAffine& f, const RVec& z) {
  if (f.plus_infinity)
    throw std::domain_error("pa_gradient on +infinity sentinel");
  auto loc = f.arr->locate(z);
  if (std::holds_alternative<int>(loc))
    return f.pieces[size_t(std::get<int>(loc))].gradient();
  if (std::holds_alternative<LocateOutside>(loc))
    throw std::domain_error("pa_gradient outside window");
  std::vector<RVec> grads;
  for (const auto& c : f.arr->cells()) {
    if (point_in_closed_convex(c.poly, z)) {
      RVec g = f.pieces[size_t(c.id)].gradient();
      if (std::find(grads.begin(), grads.end(), g) == grads.end())
        grads.push_back(g);
    }
  }
  throw OnLineGradient(std::move(grads));
}

PwAffine pa_min(const PwAffine& f, const PwAffine& g) {
  if (f.plus_infinity) return g;
  if (g.plus_infinity) return f;

  std::vector<RLine> lines = f.arr->lines();
  lines.insert(lines.end(), g.arr->lines().begin(), g.arr->lines().end());

  bool degenerate = false;
  std::vector<BBox> fb, gb;
  for (const auto& c : f.arr->cells()) fb.push_back(BBox::of(c.poly));
  for (const auto& c : g.arr->cells()) gb.push_back(BBox::of(c.poly));

  for (const auto& cf : f.arr->cells()) {
    const AffinePiece& pf = f.pieces[size_t(cf.id)];
    for (const auto& cg : g.arr->cells()) {
      if (!fb[size_t(cf.id)].overlaps(gb[size_t(cg.id)])) continue;
      const AffinePiece& pg = g.pieces[size_t(cg.id)];
      if (pf == pg) {
        auto ov = convex_intersect(cf.poly, cg.poly);
        if (ov.size() >= 3 && polygon_area2(ov) > 0) degenerate = true;
        continue;
      }
      Rat dx = pf.gx - pg.gx, dy = pf.gy - pg.gy;
      if (dx == 0 && dy == 0) continue;  // parallel, never equal
      auto ov = convex_intersect(cf.poly, cg.poly);
      if (ov.size() < 3 || polygon_area2(ov) == 0) continue;
      RLine coin(dx, dy, pg.b - pf.b);
      bool pos = false, neg = false;
      for (const auto& p : ov) {
        int s = coin.side(p);
        pos |= s > 0;
        neg |= s < 0;
      }
      if (pos && neg) lines.push_back(coin);
    }
  }

  PwAffine out;
  out.degenerate_overlap = degenerate;
  out.arr = Arrangement::build(std::move(lines), f.arr->window());
  out.pieces.reserve(out.arr->cells().size());
  for (const auto& c : out.arr->cells()) {
    Rat vf = pa_eval(f, c.sample);
    Rat vg = pa_eval(g, c.sample);
    const PwAffine& src = (vf <= vg) ? f : g;
    auto loc = src.arr->locate(c.sample);
    out.pieces.push_back(src.pieces[size_t(std::get<int>(loc))]);
  }
  return out;
}

PwAffine pa_dist_to_lines(const std::vector<RLine>& input, const Rat& scale,
                          Window w) {
  // dedup
  std::vector<RLine> ls;
  {
    std::set<std::string> seen;
    for (const auto& l : input)
      if (seen.insert(l.key()).second) ls.push_back(l);
  }
  if (ls.empty()) return PwAffine::infinity_sentinel();

  std::vector<AffinePiece> branches;
  std::vector<Rat> divisor(ls.size());
  for (size_t i = 0; i < ls.size(); ++i) {
    Rat n2 = ls[i].norm2();
    Int root = isqrt_ceil(n2.get_num());  // n2 is an integer here
    Rat r = (Rat(root * root) == n2) ? Rat(root) : sqrt_upper(n2);
    divisor[i] = r;
    Rat s = scale / r;
    branches.push_back({s * Rat(ls[i].a), s * Rat(ls[i].b), -s * Rat(ls[i].c)});
    branches.push_back({-s * Rat(ls[i].a), -s * Rat(ls[i].b), s * Rat(ls[i].c)});
  }

  // the (nonnegative) branch of least value at z
  auto argmin_at = [&](const RVec& z) {
    bool first = true;
    Rat bestd;
    size_t best = 0;
    for (size_t i = 0; i < branches.size(); ++i) {
      Rat v = branches[i].eval(z);
      if (v < 0) continue;
      if (first || v < bestd) {
        first = false;
        bestd = v;
        best = i;
      }
    }
    return std::make_pair(best, bestd);
  };

  // Iterative refinement: start from the input lines and insert the tie
  // locus of two distance cones only where the minimum actually switches
  // (detected exactly at cell vertices). Inactive tie lines never enter
  // the arrangement, which keeps audits of late stages small.
  std::vector<RLine> lines = ls;
  std::set<std::string> present;
  for (const auto& l : lines) present.insert(l.key());

  PwAffine out;
  for (int pass = 0; pass < 64; ++pass) {
    out.arr = Arrangement::build(lines, w);
    out.pieces.clear();
    out.pieces.reserve(out.arr->cells().size());
    std::vector<RLine> missing;
    for (const auto& c : out.arr->cells()) {
      auto [chosen, chosen_val] = argmin_at(c.sample);
      (void)chosen_val;
      out.pieces.push_back(branches[chosen]);
      // within a closed convex cell the deficit of any affine competitor is
      // extremal at a vertex, so vertex checks certify per-cell purity.
      // Every admissible branch strictly below the chosen one contributes
      // its tie line: at vertices on an input line both mirror branches
      // vanish, and only one of them is the in-cell competitor.
      for (const RVec& v : c.poly) {
        Rat chosen_val = branches[chosen].eval(v);
        for (size_t j = 0; j < branches.size(); ++j) {
          if (j == chosen) continue;
          Rat vj = branches[j].eval(v);
          if (vj < 0 || vj >= chosen_val) continue;
          Rat A = branches[chosen].gx - branches[j].gx;
          Rat B = branches[chosen].gy - branches[j].gy;
          Rat C = branches[j].b - branches[chosen].b;
          if (A == 0 && B == 0) continue;
          RLine tie(A, B, C);
          if (present.insert(tie.key()).second) missing.push_back(tie);
        }
      }
    }
    if (missing.empty()) return out;
    for (auto& l : missing) lines.push_back(std::move(l));
  }
  throw std::runtime_error("pa_dist_to_lines: refinement did not settle");
}

ContinuityReport pa_check_continuity(const PwAffine& f) {
  ContinuityReport rep;
  if (f.plus_infinity) return rep;
  for (const auto& adj : f.arr->adjacency()) {
    const AffinePiece& a = f.pieces[size_t(adj.cell_a)];
    const AffinePiece& b = f.pieces[size_t(adj.cell_b)];
    ++rep.edges_checked;
    if (a.eval(adj.p) != b.eval(adj.p) || a.eval(adj.q) != b.eval(adj.q))
      rep.ok = false;
  }
  return rep;
}

Rat pa_lipschitz2(const PwAffine& f) {
  Rat best(0);
  for (const auto& p : f.pieces) {
    Rat n2 = p.gx * p.gx + p.gy * p.gy;
    if (n2 > best) best = n2;
  }
  return best;
}

Rat SegPA::at(const Rat& t) const {
  if (nodes.empty()) throw std::domain_error("empty SegPA");
  if (t <= nodes.front()) return values.front();
  if (t >= nodes.back()) return values.back();
  // binary search for the containing interval
  size_t lo = 0, hi = nodes.size() - 1;
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (nodes[mid] <= t) lo = mid;
    else hi = mid;
  }
  Rat span = nodes[hi] - nodes[lo];
  Rat u = (t - nodes[lo]) / span;
  return values[lo] + (values[hi] - values[lo]) * u;
}

SegPA pa_restrict(const PwAffine& f, const RVec& z, const RVec& dir,
                  const Rat& lo, const Rat& hi) {
  if (f.plus_infinity) throw std::domain_error("restrict on sentinel");
  std::vector<Rat> ts{lo, hi};
  if (lo < 0 && 0 < hi) ts.push_back(Rat(0));
  for (const auto& l : f.arr->lines()) {
    // (a,b).(z + t dir) = c
    Rat denom = Rat(l.a) * dir.x + Rat(l.b) * dir.y;
    if (denom == 0) continue;
    Rat t = -l.eval(z) / denom;
    if (t > lo && t < hi) ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  SegPA out;
  out.nodes = std::move(ts);
  out.values.reserve(out.nodes.size());
  for (const auto& t : out.nodes) out.values.push_back(pa_eval(f, z + dir * t));
  return out;
}

ChordExtrema chord_slope_extrema(const SegPA& g) {
  std::vector<size_t> left, right;  // node indices with t <= 0 / t >= 0
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    if (g.nodes[i] <= 0) left.push_back(i);
    if (g.nodes[i] >= 0) right.push_back(i);
  }
  ChordExtrema ex;
  bool first = true;
  for (size_t ia : left) {
    for (size_t ib : right) {
      const Rat& a = g.nodes[ia];
      const Rat& b = g.nodes[ib];
      if (a == b) continue;  // excludes (0,0) and nothing else
      Rat slope = (g.values[ib] - g.values[ia]) / (b - a);
      if (first || slope < ex.min_slope) {
        ex.min_slope = slope;
        ex.a_min = a;
        ex.b_min = b;
      }
      if (first || slope > ex.max_slope) {
        ex.max_slope = slope;
        ex.a_max = a;
        ex.b_max = b;
      }
      first = false;
    }
  }
  if (first) throw std::domain_error("chord_slope_extrema: no chords");
  ex.degenerate = (ex.min_slope == ex.max_slope);
  return ex;
}

ChordExtrema chord_slope_extrema(const PwAffine& f, const RVec& z,
                                 const RVec& e_dir, const Rat& eps) {
  if (!(eps > 0)) throw std::invalid_argument("chord_slope_extrema: eps <= 0");
  return chord_slope_extrema(pa_restrict(f, z, e_dir, -eps, eps));
}

}  // namespace unrect
