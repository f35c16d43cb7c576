#include "arrangement.hpp"

#include <algorithm>
#include <set>

namespace unrect {

bool Window::crossed_by(const RLine& l) const {
  int pos = 0, neg = 0, zero = 0;
  for (const auto& c : corners()) {
    int s = l.side(c);
    if (s > 0) ++pos;
    else if (s < 0) ++neg;
    else ++zero;
  }
  return zero > 0 || (pos > 0 && neg > 0);
}

namespace {

// Split a convex polygon by a line into (negative side, positive side).
// Vertices exactly on the line go to both parts. Returns false when the
// line does not cross the interior.
bool split_polygon(const std::vector<RVec>& poly, const RLine& l,
                   std::vector<RVec>& neg, std::vector<RVec>& pos) {
  const size_t n = poly.size();
  std::vector<int> sign(n);
  bool has_pos = false, has_neg = false;
  for (size_t i = 0; i < n; ++i) {
    sign[i] = l.side(poly[i]);
    has_pos |= sign[i] > 0;
    has_neg |= sign[i] < 0;
  }
  if (!has_pos || !has_neg) return false;
  neg.clear();
  pos.clear();
  for (size_t i = 0; i < n; ++i) {
    const RVec& a = poly[i];
    const RVec& b = poly[(i + 1) % n];
    if (sign[i] >= 0) pos.push_back(a);
    if (sign[i] <= 0) neg.push_back(a);
    if ((sign[i] > 0 && sign[(i + 1) % n] < 0) ||
        (sign[i] < 0 && sign[(i + 1) % n] > 0)) {
      // intersection of edge (a,b) with l
      Rat fa = l.eval(a), fb = l.eval(b);
      Rat t = fa / (fa - fb);
      RVec p = a + (b - a) * t;
      pos.push_back(p);
      neg.push_back(p);
    }
  }
  return true;
}

void dedup_consecutive(std::vector<RVec>& poly) {
  std::vector<RVec> out;
  for (const auto& p : poly) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  poly = std::move(out);
}

Rat polygon_area2(const std::vector<RVec>& poly) {
  Rat s(0);
  for (size_t i = 0; i < poly.size(); ++i) {
    const RVec& a = poly[i];
    const RVec& b = poly[(i + 1) % poly.size()];
    s += a.cross(b);
  }
  return rat_abs(s);
}

RVec centroid(const std::vector<RVec>& poly) {
  Rat sx(0), sy(0);
  for (const auto& p : poly) {
    sx += p.x;
    sy += p.y;
  }
  Rat n(long(poly.size()));
  return RVec(sx / n, sy / n);
}

}  // namespace

std::shared_ptr<const Arrangement> Arrangement::build(std::vector<RLine> lines,
                                                      Window window,
                                                      int line_cap) {
  auto arr = std::make_shared<Arrangement>();
  arr->window_ = window;

  // dedup and drop lines outside the window
  std::set<std::string> seen;
  for (auto& l : lines) {
    if (!window.crossed_by(l)) continue;
    if (seen.insert(l.key()).second) arr->lines_.push_back(l);
  }
  if (int(arr->lines_.size()) > line_cap)
    throw LineCapExceeded(int(arr->lines_.size()));

  std::vector<std::vector<RVec>> polys;
  polys.push_back(window.corners());
  for (const auto& l : arr->lines_) {
    std::vector<std::vector<RVec>> next;
    next.reserve(polys.size() + 8);
    for (auto& poly : polys) {
      std::vector<RVec> neg, pos;
      if (!split_polygon(poly, l, neg, pos)) {
        next.push_back(std::move(poly));
        continue;
      }
      dedup_consecutive(neg);
      dedup_consecutive(pos);
      if (neg.size() >= 3 && polygon_area2(neg) > 0) next.push_back(std::move(neg));
      if (pos.size() >= 3 && polygon_area2(pos) > 0) next.push_back(std::move(pos));
    }
    polys = std::move(next);
  }

  arr->cells_.reserve(polys.size());
  for (auto& poly : polys) {
    Cell c;
    c.id = int(arr->cells_.size());
    c.poly = std::move(poly);
    c.sample = centroid(c.poly);
    c.signs.reserve(arr->lines_.size());
    for (const auto& l : arr->lines_) c.signs.push_back(int8_t(l.side(c.sample)));
    arr->sign_index_[c.signs] = c.id;
    arr->cells_.push_back(std::move(c));
  }

  // adjacency: collect per-line intervals of cell boundary edges
  struct Entry {
    Rat t0, t1;  // parameter along the line (by <p, dir>)
    int cell;
  };
  std::vector<std::vector<Entry>> per_line(arr->lines_.size());
  for (const auto& c : arr->cells_) {
    const size_t n = c.poly.size();
    for (size_t i = 0; i < n; ++i) {
      const RVec& a = c.poly[i];
      const RVec& b = c.poly[(i + 1) % n];
      for (size_t li = 0; li < arr->lines_.size(); ++li) {
        const RLine& l = arr->lines_[li];
        if (l.side(a) == 0 && l.side(b) == 0) {
          RVec d = l.direction();
          Rat ta = a.dot(d), tb = b.dot(d);
          if (ta > tb) std::swap(ta, tb);
          if (ta < tb) per_line[li].push_back({ta, tb, c.id});
        }
      }
    }
  }
  for (size_t li = 0; li < per_line.size(); ++li) {
    auto& es = per_line[li];
    for (size_t i = 0; i < es.size(); ++i) {
      for (size_t j = i + 1; j < es.size(); ++j) {
        if (es[i].cell == es[j].cell) continue;
        Rat lo = std::max(es[i].t0, es[j].t0);
        Rat hi = std::min(es[i].t1, es[j].t1);
        if (lo >= hi) continue;
        // two interior points of the overlap, mapped back to the plane
        const RLine& l = arr->lines_[li];
        RVec d = l.direction();
        RVec origin = l.point_on();
        Rat dn = d.norm2();
        Rat t_origin = origin.dot(d);
        auto at = [&](const Rat& t) {
          return origin + d * ((t - t_origin) / dn);
        };
        Rat m1 = lo + (hi - lo) / 3;
        Rat m2 = lo + (hi - lo) * 2 / 3;
        arr->adjacency_.push_back(
            {int(li), es[i].cell, es[j].cell, at(m1), at(m2)});
      }
    }
  }
  return arr;
}

LocateResult Arrangement::locate(const RVec& z) const {
  if (!window_.contains(z)) return LocateOutside{};
  std::vector<int8_t> signs(lines_.size());
  LocateOnLine on;
  for (size_t i = 0; i < lines_.size(); ++i) {
    signs[i] = int8_t(lines_[i].side(z));
    if (signs[i] == 0) on.line_ids.push_back(int(i));
  }
  if (!on.line_ids.empty()) return on;
  auto it = sign_index_.find(signs);
  if (it == sign_index_.end()) return LocateOutside{};
  return it->second;
}

}  // namespace unrect
