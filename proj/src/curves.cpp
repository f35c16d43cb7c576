#include "curves.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace unrect {

namespace {

constexpr double kJoinTol = 1e-9;
constexpr double kTangentTol = 1e-6;
constexpr double kParamTol = 1e-13;
constexpr double kWidthFloor = 1e-14;

Vec2 hermite_point(const Vec2& p0, const Vec2& m0, const Vec2& p1,
                   const Vec2& m1, double t) {
  double t2 = t * t, t3 = t2 * t;
  double h00 = 2 * t3 - 3 * t2 + 1;
  double h10 = t3 - 2 * t2 + t;
  double h01 = -2 * t3 + 3 * t2;
  double h11 = t3 - t2;
  return p0 * h00 + m0 * h10 + p1 * h01 + m1 * h11;
}

Vec2 hermite_velocity(const Vec2& p0, const Vec2& m0, const Vec2& p1,
                      const Vec2& m1, double t) {
  double t2 = t * t;
  double h00 = 6 * t2 - 6 * t;
  double h10 = 3 * t2 - 4 * t + 1;
  double h01 = -6 * t2 + 6 * t;
  double h11 = 3 * t2 - 2 * t;
  return p0 * h00 + m0 * h10 + p1 * h01 + m1 * h11;
}

// adaptive Simpson quadrature
double simpson(const std::function<double(double)>& f, double a, double b,
               double fa, double fm, double fb, double whole, double tol,
               int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6 * (fa + 4 * flm + fm);
  double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15;
  return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-9) {
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

C1Curve make_curve(std::vector<C1Curve::Seg> segs);

std::pair<size_t, double> C1Curve::locate(double s) const {
  s = std::clamp(s, 0.0, length_);
  size_t lo = 0, hi = segs_.size();
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (offsets_[mid] <= s) lo = mid;
    else hi = mid;
  }
  return {lo, s - offsets_[lo]};
}

namespace {

// invert the arclength table: parameter t with arc(t) = u. The table is
// dense enough that two Newton polishes with a short fixed Simpson rule
// reach ~1e-12.
double hermite_param_at(const C1Curve::HermiteSeg& h, double u) {
  auto it = std::upper_bound(h.s_table.begin(), h.s_table.end(), u);
  size_t j = size_t(std::max<long>(0, (it - h.s_table.begin()) - 1));
  j = std::min(j, h.s_table.size() - 2);
  double frac = (u - h.s_table[j]) / (h.s_table[j + 1] - h.s_table[j]);
  double t = h.t_table[j] + frac * (h.t_table[j + 1] - h.t_table[j]);
  auto speed = [&](double q) {
    return hermite_velocity(h.p0, h.m0, h.p1, h.m1, q).norm();
  };
  for (int iter = 0; iter < 3; ++iter) {
    // arc(t) - s_j by Simpson over [t_j, t] with four panels
    double a = h.t_table[j];
    double span = t - a;
    double arc = 0;
    if (span != 0) {
      double acc = speed(a) + speed(t);
      for (int q = 1; q < 8; ++q)
        acc += (q % 2 ? 4.0 : 2.0) * speed(a + span * q / 8);
      arc = span / 24 * acc;
    }
    t -= (h.s_table[j] + arc - u) / speed(t);
    t = std::clamp(t, 0.0, 1.0);
  }
  return t;
}

}  // namespace

Vec2 C1Curve::eval(double s) const {
  auto [i, u] = locate(s);
  const Seg& seg = segs_[i];
  if (std::holds_alternative<LineSeg>(seg)) {
    const auto& l = std::get<LineSeg>(seg);
    return l.p0 + l.dir * u;
  }
  if (std::holds_alternative<ArcSeg>(seg)) {
    const auto& a = std::get<ArcSeg>(seg);
    double ang = a.angle0 + a.orient * u / a.radius;
    return a.center + Vec2(std::cos(ang), std::sin(ang)) * a.radius;
  }
  const auto& h = std::get<HermiteSeg>(seg);
  return hermite_point(h.p0, h.m0, h.p1, h.m1, hermite_param_at(h, u));
}

Vec2 C1Curve::deriv(double s) const {
  auto [i, u] = locate(s);
  const Seg& seg = segs_[i];
  if (std::holds_alternative<LineSeg>(seg))
    return std::get<LineSeg>(seg).dir;
  if (std::holds_alternative<ArcSeg>(seg)) {
    const auto& a = std::get<ArcSeg>(seg);
    double ang = a.angle0 + a.orient * u / a.radius;
    return Vec2(-std::sin(ang), std::cos(ang)) * double(a.orient);
  }
  const auto& h = std::get<HermiteSeg>(seg);
  Vec2 vel =
      hermite_velocity(h.p0, h.m0, h.p1, h.m1, hermite_param_at(h, u));
  return vel * (1.0 / vel.norm());
}

namespace {

C1Curve::HermiteSeg build_hermite(Vec2 p0, Vec2 m0, Vec2 p1, Vec2 m1) {
  C1Curve::HermiteSeg h;
  h.p0 = p0;
  h.m0 = m0;
  h.p1 = p1;
  h.m1 = m1;
  const int N = 192;
  h.t_table.resize(N + 1);
  h.s_table.resize(N + 1);
  double s = 0;
  h.t_table[0] = 0;
  h.s_table[0] = 0;
  for (int i = 1; i <= N; ++i) {
    double t0 = double(i - 1) / N, t1 = double(i) / N;
    double speed_min = 1e300;
    for (int q = 0; q <= 4; ++q) {
      double t = t0 + (t1 - t0) * q / 4.0;
      speed_min =
          std::min(speed_min, hermite_velocity(p0, m0, p1, m1, t).norm());
    }
    if (!(speed_min > 1e-9))
      throw std::invalid_argument("hermite segment with vanishing speed");
    s += integrate(
        [&](double t) { return hermite_velocity(p0, m0, p1, m1, t).norm(); },
        t0, t1, 1e-10);
    h.t_table[size_t(i)] = t1;
    h.s_table[size_t(i)] = s;
  }
  h.len = s;
  return h;
}

Vec2 seg_start(const C1Curve::Seg&);
Vec2 seg_end(const C1Curve::Seg&);
Vec2 seg_start_tangent(const C1Curve::Seg&);
Vec2 seg_end_tangent(const C1Curve::Seg&);

}  // namespace

struct CurveAccess;  // friend shim not needed; make_curve is a friend

C1Curve make_curve(std::vector<C1Curve::Seg> segs) {
  C1Curve c;
  c.segs_ = std::move(segs);
  c.offsets_.resize(c.segs_.size() + 1, 0.0);
  for (size_t i = 0; i < c.segs_.size(); ++i) {
    double len = std::visit([](const auto& s) { return s.len; }, c.segs_[i]);
    c.offsets_[i + 1] = c.offsets_[i] + len;
  }
  c.length_ = c.offsets_.back();
  return c;
}

namespace {

Vec2 seg_start(const C1Curve::Seg& s) {
  if (std::holds_alternative<C1Curve::LineSeg>(s))
    return std::get<C1Curve::LineSeg>(s).p0;
  if (std::holds_alternative<C1Curve::ArcSeg>(s)) {
    const auto& a = std::get<C1Curve::ArcSeg>(s);
    return a.center + Vec2(std::cos(a.angle0), std::sin(a.angle0)) * a.radius;
  }
  return std::get<C1Curve::HermiteSeg>(s).p0;
}

Vec2 seg_end(const C1Curve::Seg& s) {
  if (std::holds_alternative<C1Curve::LineSeg>(s)) {
    const auto& l = std::get<C1Curve::LineSeg>(s);
    return l.p0 + l.dir * l.len;
  }
  if (std::holds_alternative<C1Curve::ArcSeg>(s)) {
    const auto& a = std::get<C1Curve::ArcSeg>(s);
    double ang = a.angle0 + a.orient * a.len / a.radius;
    return a.center + Vec2(std::cos(ang), std::sin(ang)) * a.radius;
  }
  return std::get<C1Curve::HermiteSeg>(s).p1;
}

Vec2 seg_start_tangent(const C1Curve::Seg& s) {
  if (std::holds_alternative<C1Curve::LineSeg>(s))
    return std::get<C1Curve::LineSeg>(s).dir;
  if (std::holds_alternative<C1Curve::ArcSeg>(s)) {
    const auto& a = std::get<C1Curve::ArcSeg>(s);
    return Vec2(-std::sin(a.angle0), std::cos(a.angle0)) * double(a.orient);
  }
  const auto& h = std::get<C1Curve::HermiteSeg>(s);
  Vec2 v = hermite_velocity(h.p0, h.m0, h.p1, h.m1, 0);
  return v * (1.0 / v.norm());
}

Vec2 seg_end_tangent(const C1Curve::Seg& s) {
  if (std::holds_alternative<C1Curve::LineSeg>(s))
    return std::get<C1Curve::LineSeg>(s).dir;
  if (std::holds_alternative<C1Curve::ArcSeg>(s)) {
    const auto& a = std::get<C1Curve::ArcSeg>(s);
    double ang = a.angle0 + a.orient * a.len / a.radius;
    return Vec2(-std::sin(ang), std::cos(ang)) * double(a.orient);
  }
  const auto& h = std::get<C1Curve::HermiteSeg>(s);
  Vec2 v = hermite_velocity(h.p0, h.m0, h.p1, h.m1, 1);
  return v * (1.0 / v.norm());
}

}  // namespace

C1Curve C1Curve::segment(Vec2 a, Vec2 b) {
  Vec2 d = b - a;
  double len = d.norm();
  if (!(len > 0)) throw std::invalid_argument("degenerate segment");
  LineSeg l{a, d * (1.0 / len), len};
  return make_curve({Seg{l}});
}

C1Curve C1Curve::arc(Vec2 center, double radius, double angle0,
                     double angle1) {
  if (!(radius > 0)) throw std::invalid_argument("arc radius must be > 0");
  if (angle0 == angle1) throw std::invalid_argument("degenerate arc");
  int orient = angle1 > angle0 ? +1 : -1;
  ArcSeg a{center, radius, angle0, orient,
           std::abs(angle1 - angle0) * radius};
  return make_curve({Seg{a}});
}

C1Curve C1Curve::hermite(Vec2 p0, Vec2 m0, Vec2 p1, Vec2 m1) {
  return make_curve({Seg{build_hermite(p0, m0, p1, m1)}});
}

C1Curve& C1Curve::append(const C1Curve& other) {
  if (segs_.empty()) {
    *this = other;
    return *this;
  }
  Vec2 e = seg_end(segs_.back());
  Vec2 s = seg_start(other.segs_.front());
  if ((e - s).norm() > kJoinTol)
    throw std::invalid_argument("curve pieces do not connect");
  Vec2 te = seg_end_tangent(segs_.back());
  Vec2 ts = seg_start_tangent(other.segs_.front());
  if ((te - ts).norm() > kTangentTol)
    throw std::invalid_argument("corner between curve pieces rejected");
  for (const auto& seg : other.segs_) segs_.push_back(seg);
  offsets_.resize(segs_.size() + 1);
  offsets_[0] = 0;
  for (size_t i = 0; i < segs_.size(); ++i) {
    double len = std::visit([](const auto& sg) { return sg.len; }, segs_[i]);
    offsets_[i + 1] = offsets_[i] + len;
  }
  length_ = offsets_.back();
  return *this;
}

double C1Curve::unit_speed_defect(int grid) const {
  double worst = 0;
  for (int i = 0; i <= grid; ++i) {
    double s = length_ * i / grid;
    worst = std::max(worst, std::abs(deriv(s).norm() - 1.0));
  }
  return worst;
}

C1Curve C1Curve::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  auto vec = [](const nlohmann::json& v) {
    return Vec2(v.at(0).get<double>(), v.at(1).get<double>());
  };
  C1Curve out;
  bool first = true;
  for (const auto& seg : j.at("segments")) {
    std::string type = seg.at("type").get<std::string>();
    C1Curve piece;
    if (type == "line") {
      piece = segment(vec(seg.at("from")), vec(seg.at("to")));
    } else if (type == "arc") {
      piece = arc(vec(seg.at("center")), seg.at("radius").get<double>(),
                  seg.at("from_angle").get<double>(),
                  seg.at("to_angle").get<double>());
    } else if (type == "hermite") {
      piece = hermite(vec(seg.at("p0")), vec(seg.at("m0")), vec(seg.at("p1")),
                      vec(seg.at("m1")));
    } else {
      throw std::invalid_argument("unknown segment type: " + type);
    }
    if (first) {
      out = piece;
      first = false;
    } else {
      out.append(piece);
    }
  }
  if (first) throw std::invalid_argument("curve file has no segments");
  return out;
}

C1Curve C1Curve::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open curve file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------
// regions and preimages

bool region_contains(const Region& r, const Vec2& p) {
  if (std::holds_alternative<StripRegion>(r)) {
    const auto& s = std::get<StripRegion>(r);
    Vec2 n = s.dir.perp();
    return std::abs((p - s.base).dot(n)) < s.half_width;
  }
  if (std::holds_alternative<BallRegion>(r)) {
    const auto& b = std::get<BallRegion>(r);
    return (p - b.center).norm() < b.radius;
  }
  const auto& poly = std::get<PolyRegion>(r).pts;
  for (size_t i = 0; i < poly.size(); ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
    if ((b - a).cross(p - a) <= 0) return false;
  }
  return true;
}

double region_diam_v(const Region& r, const UnitVec& v) {
  if (std::holds_alternative<StripRegion>(r)) {
    const auto& s = std::get<StripRegion>(r);
    if (std::abs(s.dir.dot(v.vec())) > 1e-12)
      return std::numeric_limits<double>::infinity();
    return 2 * s.half_width;
  }
  if (std::holds_alternative<BallRegion>(r))
    return 2 * std::get<BallRegion>(r).radius;
  return diam_v(std::get<PolyRegion>(r).pts, v);
}

namespace {

// signed boundary margin: negative strictly inside, positive outside
double region_margin(const Region& r, const Vec2& p) {
  if (std::holds_alternative<StripRegion>(r)) {
    const auto& s = std::get<StripRegion>(r);
    Vec2 n = s.dir.perp();
    return std::abs((p - s.base).dot(n)) - s.half_width;
  }
  if (std::holds_alternative<BallRegion>(r)) {
    const auto& b = std::get<BallRegion>(r);
    return (p - b.center).norm() - b.radius;
  }
  const auto& poly = std::get<PolyRegion>(r).pts;
  double worst = -1e300;
  for (size_t i = 0; i < poly.size(); ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % poly.size()];
    Vec2 e = b - a;
    double side = -e.cross(p - a) / e.norm();
    worst = std::max(worst, side);
  }
  return worst;
}

double bisect_root(const std::function<double(double)>& f, double a, double b,
                   double fa, double fb) {
  (void)fb;
  for (int i = 0; i < 60 && (b - a) > kParamTol; ++i) {
    double m = 0.5 * (a + b);
    double fm = f(m);
    if ((fa <= 0) == (fm <= 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

PreimageResult preimage_measure(const C1Curve& c, const Region& r, int scan,
                                int crossing_cap) {
  PreimageResult out;
  const double L = c.length();
  auto margin = [&](double s) { return region_margin(r, c.eval(s)); };

  if (std::holds_alternative<StripRegion>(r) &&
      std::get<StripRegion>(r).half_width <= kWidthFloor) {
    // below the float resolution floor: the preimage has measure below
    // anything the scan could certify; report zero with a width-scaled bar
    const auto& s = std::get<StripRegion>(r);
    Vec2 n = s.dir.perp();
    auto center = [&](double t) { return (c.eval(t) - s.base).dot(n); };
    int crossings = 0;
    double prev = center(0);
    for (int i = 1; i <= scan; ++i) {
      double cur = center(L * i / scan);
      if ((prev <= 0) != (cur <= 0)) ++crossings;
      prev = cur;
    }
    out.below_resolution = true;
    out.crossings = crossings;
    out.error_bar = 16.0 * s.half_width * std::max(1, crossings);
    return out;
  }

  double prev_s = 0, prev_f = margin(0);
  std::vector<double> roots;
  for (int i = 1; i <= scan; ++i) {
    double cur_s = L * i / scan;
    double cur_f = margin(cur_s);
    if ((prev_f <= 0) != (cur_f <= 0)) {
      if (int(roots.size()) >= crossing_cap)
        throw CrossingCapExceeded(
            "crossing count exceeds cap (degenerate tangency suspected)");
      double root = bisect_root(margin, prev_s, cur_s, prev_f, cur_f);
      // tangency diagnostics: derivative of the margin along the curve
      double h = 1e-7 * std::max(1.0, L);
      double d = (margin(std::min(root + h, L)) -
                  margin(std::max(root - h, 0.0))) /
                 (2 * h);
      if (std::abs(d) < 1e-6) {
        // rescan this bracket at 8x resolution once
        int refines = 0;
        double a = prev_s, fa = prev_f;
        for (int q = 1; q <= 8; ++q) {
          double b = prev_s + (cur_s - prev_s) * q / 8.0;
          double fb = margin(b);
          if ((fa <= 0) != (fb <= 0)) {
            double rr = bisect_root(margin, a, b, fa, fb);
            double dd = (margin(std::min(rr + h, L)) -
                         margin(std::max(rr - h, 0.0))) /
                        (2 * h);
            if (std::abs(dd) < 1e-6)
              throw TangencyError("persistent boundary tangency near s=" +
                                  std::to_string(rr));
            roots.push_back(rr);
            ++refines;
          }
          a = b;
          fa = fb;
        }
        if (refines == 0)
          throw TangencyError("tangential bracket lost under refinement");
      } else {
        roots.push_back(root);
      }
    }
    prev_s = cur_s;
    prev_f = cur_f;
  }

  std::sort(roots.begin(), roots.end());
  out.crossings = int(roots.size());
  std::vector<double> pts{0.0};
  pts.insert(pts.end(), roots.begin(), roots.end());
  pts.push_back(L);
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double mid = 0.5 * (pts[i] + pts[i + 1]);
    if (region_contains(r, c.eval(mid))) {
      out.measure += pts[i + 1] - pts[i];
      out.intervals.emplace_back(pts[i], pts[i + 1]);
    }
  }
  out.error_bar = double(out.crossings + 1) * 2 * kParamTol;
  return out;
}

CheckReport crossing_bound_check(const C1Curve& c, const Region& w,
                                 const UnitVec& v, double delta, int scan) {
  CheckReport rep;
  rep.check_id = "crossing-bound";
  Cone cone(v, delta, true);
  for (int i = 0; i <= scan; ++i) {
    double s = c.length() * i / scan;
    Vec2 d = c.deriv(s);
    if (!cone_contains(cone, UnitVec(d.x, d.y)))
      throw std::invalid_argument("tangent outside the double cone at s=" +
                                  std::to_string(s));
  }
  PreimageResult pre = preimage_measure(c, w, scan);
  rep.lhs = pre.measure;
  rep.rhs = region_diam_v(w, v) / (1.0 - delta);
  rep.error_bar = pre.error_bar;
  rep.pass = rep.lhs <= rep.rhs + 1e-6 + rep.error_bar;
  if (pre.below_resolution) rep.note = "below float resolution";
  return rep;
}

CheckReport convex_slope_integral_check(const C1Curve& c, const PolyRegion& P,
                                        const UnitVec& e, int scan) {
  CheckReport rep;
  rep.check_id = "convex-cell-bound";
  for (int i = 0; i <= scan; ++i) {
    double s = c.length() * i / scan;
    if (c.deriv(s).dot(e.vec()) < -1e-12)
      throw std::invalid_argument("monotonicity <gamma',e> >= 0 violated at s=" +
                                  std::to_string(s));
  }
  PreimageResult pre = preimage_measure(c, Region(P), scan);
  Vec2 eperp = e.perp().vec();
  double integral = 0;
  for (auto [a, b] : pre.intervals)
    integral += (c.eval(b) - c.eval(a)).dot(eperp);
  rep.lhs = std::abs(integral);
  rep.rhs = 6.0 * diam_v(P.pts, UnitVec(eperp.x, eperp.y));
  rep.error_bar = pre.error_bar;
  rep.pass = rep.lhs <= rep.rhs + 1e-6 + rep.error_bar;
  return rep;
}

// ---------------------------------------------------------------------------
// filtration

Filtration build_filtration(const Construction& con, const C1Curve& c,
                            int p_max, int scan) {
  const StripSchedule& sched = con.schedule();
  // cone hypothesis: tangents inside C(w, 2 eta)
  {
    Cone cone(UnitVec(to_double(sched.w.v.x), to_double(sched.w.v.y)),
              2 * to_double(sched.eta), false);
    for (int i = 0; i <= 512; ++i) {
      double s = c.length() * i / 512;
      Vec2 d = c.deriv(s);
      if (!cone_contains(cone, UnitVec(d.x, d.y)))
        throw std::invalid_argument("tangent outside C(w, 2 eta) at s=" +
                                    std::to_string(s));
    }
  }

  Filtration f;
  f.curve = &c;
  f.depth = con.depth();
  f.p_max = p_max;

  std::vector<double> roots;
  f.resolvable_depth = 0;
  for (int k = 1; k <= con.depth(); ++k) {
    const Stage& st = sched.stages[size_t(k - 1)];
    double rho = to_double(st.rho);
    if (rho <= kWidthFloor) break;
    f.resolvable_depth = k;
    StripRegion sr{to_vec2(st.x),
                   Vec2(to_double(st.e.v.x), to_double(st.e.v.y)), rho};
    PreimageResult pre = preimage_measure(c, Region(sr), scan);
    for (auto [a, b] : pre.intervals) {
      if (a > 0) roots.push_back(a);
      if (b < c.length()) roots.push_back(b);
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());

  f.breaks.push_back(0.0);
  for (double r : roots) f.breaks.push_back(r);
  f.breaks.push_back(c.length());

  // membership tuple per finest interval
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    double mid = 0.5 * (f.breaks[i] + f.breaks[i + 1]);
    Vec2 p = c.eval(mid);
    std::vector<int> ks;
    for (int k = 1; k <= f.resolvable_depth; ++k) {
      const Stage& st = sched.stages[size_t(k - 1)];
      Vec2 n(to_double(st.e.perp().v.x), to_double(st.e.perp().v.y));
      double off = (p - to_vec2(st.x)).dot(n);
      if (std::abs(off) < to_double(st.rho)) ks.push_back(k);
    }
    f.k_of.push_back(std::move(ks));
  }

  // levels
  for (int p = 0; p <= p_max; ++p) {
    CurvePartition part;
    part.level = p;
    part.breaks = f.breaks;
    std::map<std::vector<int>, int> atom_ids;
    for (size_t i = 0; i < f.k_of.size(); ++i) {
      std::vector<int> tuple;
      for (int q = 1; q <= p; ++q) {
        if (int(f.k_of[i].size()) >= q)
          tuple.push_back(f.k_of[i][size_t(q - 1)]);
        else
          tuple.push_back(kInfinity);
      }
      auto [it, fresh] = atom_ids.try_emplace(tuple, int(part.atoms.size()));
      if (fresh) {
        CurveAtom a;
        a.tuple = tuple;
        part.atoms.push_back(std::move(a));
      }
      CurveAtom& a = part.atoms[size_t(it->second)];
      a.intervals.push_back(int(i));
      double s0 = f.breaks[i], s1 = f.breaks[i + 1];
      a.length += s1 - s0;
      a.dgamma = a.dgamma + (c.eval(s1) - c.eval(s0));
      part.atom_of.push_back(it->second);
    }
    for (auto& a : part.atoms)
      if (a.length > 0) a.beta = a.dgamma * (1.0 / a.length);
    f.levels.push_back(std::move(part));
  }
  return f;
}

std::vector<CheckReport> strip_slope_integral_check(const Construction& con,
                                                    const C1Curve& c,
                                                    const Filtration& f, int k,
                                                    int p) {
  if (p >= int(f.levels.size()))
    throw std::invalid_argument("level p beyond filtration depth");
  const StripSchedule& sched = con.schedule();
  const Stage& st = sched.stages[size_t(k - 1)];
  Vec2 ek(to_double(st.e.v.x), to_double(st.e.v.y));
  Vec2 ekp = ek.perp();
  double rho = to_double(st.rho);

  // group the strip-k finest intervals by planar component: the sign vector
  // against the earlier boundary lines identifies the convex cell
  std::vector<RLine> earlier = sched.boundary_lines(k - 1);
  const CurvePartition& part = f.levels[size_t(p)];
  struct Comp {
    double integral = 0;
    double length = 0;
    bool constant_kp = true;
    std::set<int> atoms;
  };
  std::map<std::vector<int>, Comp> comps;
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    const auto& ks = f.k_of[i];
    bool in_strip = std::find(ks.begin(), ks.end(), k) != ks.end();
    if (!in_strip) continue;
    double mid = 0.5 * (f.breaks[i] + f.breaks[i + 1]);
    Vec2 pm = c.eval(mid);
    std::vector<int> sig;
    sig.reserve(earlier.size());
    for (const auto& l : earlier) {
      double v = to_double(Rat(l.a)) * pm.x + to_double(Rat(l.b)) * pm.y -
                 to_double(Rat(l.c));
      sig.push_back(v > 0 ? 1 : -1);
    }
    Comp& comp = comps[sig];
    int atom = part.atom_of[i];
    comp.atoms.insert(atom);
    // k_p over the component must equal k
    int kp = (int(ks.size()) >= p && p >= 1) ? ks[size_t(p - 1)] : kInfinity;
    if (p >= 1 && kp != k) comp.constant_kp = false;
    const CurveAtom& a = part.atoms[size_t(atom)];
    double len = f.breaks[i + 1] - f.breaks[i];
    comp.integral += std::abs(a.beta.dot(ekp)) * len;
    comp.length += len;
  }

  std::vector<CheckReport> out;
  for (auto& [sig, comp] : comps) {
    CheckReport rep;
    rep.check_id = "strip-slope-bound";
    if (!comp.constant_kp) {
      rep.pass = false;
      rep.note = "component without constant k_p: not admissible";
      out.push_back(rep);
      continue;
    }
    rep.lhs = comp.integral;
    rep.rhs = 12.0 * rho;
    rep.error_bar = 4 * kParamTol * double(comp.atoms.size() + 1);
    rep.pass = rep.lhs <= rep.rhs + 1e-6 + rep.error_bar;
    rep.note = "stage " + std::to_string(k) + " level " + std::to_string(p);
    out.push_back(rep);
  }
  return out;
}

DpResult dp_diagnostic(const Construction& con, const Filtration& f, int p) {
  if (p < 1 || p >= int(f.levels.size()))
    throw std::invalid_argument("dp_diagnostic: level out of range");
  const StripSchedule& sched = con.schedule();
  const CurvePartition& part = f.levels[size_t(p)];
  DpResult out;
  out.bound = std::pow(2.0, -p);
  out.expectation_bound = std::pow(4.0, -p);
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    const auto& ks = f.k_of[i];
    if (int(ks.size()) < p) continue;  // k_p infinite here
    int kp = ks[size_t(p - 1)];
    const Stage& st = sched.stages[size_t(kp - 1)];
    Vec2 ekp(to_double(st.e.perp().v.x), to_double(st.e.perp().v.y));
    const CurveAtom& a = part.atoms[size_t(part.atom_of[i])];
    double x = std::abs(a.beta.dot(ekp));
    double len = f.breaks[i + 1] - f.breaks[i];
    if (x > out.bound) {
      out.measure += len;
      out.integral += x * len;
      out.intervals.emplace_back(f.breaks[i], f.breaks[i + 1]);
    }
  }
  out.pass = out.measure <= out.bound + 1e-9;
  return out;
}

CheckReport ratio_approx_check(const Construction& con, const Filtration& f,
                               int p, double delta) {
  CheckReport rep;
  rep.check_id = "ratio-approx";
  const StripSchedule& sched = con.schedule();
  double eta = to_double(sched.eta);
  Vec2 w(to_double(sched.w.v.x), to_double(sched.w.v.y));
  Vec2 wperp = w.perp();
  const CurvePartition& part = f.levels[size_t(p)];
  double bound = std::pow(2.0, -p) / ((1 - eta) * (1 - delta));
  double threshold = std::pow(2.0, -p);
  double worst = 0;
  int checked = 0;
  for (size_t i = 0; i + 1 < f.breaks.size(); ++i) {
    const auto& ks = f.k_of[i];
    if (int(ks.size()) < p) continue;
    int kp = ks[size_t(p - 1)];
    const Stage& st = sched.stages[size_t(kp - 1)];
    Vec2 ek(to_double(st.e.v.x), to_double(st.e.v.y));
    Vec2 ekp = ek.perp();
    const CurveAtom& a = part.atoms[size_t(part.atom_of[i])];
    if (std::abs(a.beta.dot(ekp)) > threshold) continue;  // inside D_p
    double lhsr = w.dot(ekp) / w.dot(ek) -
                  a.beta.dot(wperp) / a.beta.dot(w);
    worst = std::max(worst, std::abs(lhsr));
    ++checked;
  }
  rep.lhs = worst;
  rep.rhs = bound;
  rep.error_bar = 1e-9;
  rep.pass = checked == 0 || worst <= bound + rep.error_bar;
  rep.note = "checked " + std::to_string(checked) + " intervals";
  return rep;
}

}  // namespace unrect
