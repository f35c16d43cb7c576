#include "schedule.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace unrect {

using nlohmann::json;

std::vector<RLine> StripSchedule::boundary_lines(int k) const {
  std::vector<RLine> out;
  for (int j = 1; j <= k && j <= int(stages.size()); ++j) {
    const Stage& st = stages[size_t(j - 1)];
    Strip s = st.strip();
    out.push_back(s.boundary(+1));
    out.push_back(s.boundary(-1));
  }
  return out;
}

Rat StripSchedule::rho_tail(int from) const {
  Rat sum(0);
  for (int j = from + 1; j <= depth; ++j) sum += stages[size_t(j - 1)].rho;
  if (rho_rule) {
    const auto& [base, ratio] = *rho_rule;
    int start = std::max(from + 1, depth + 1);
    // sum_{j>=start} base * ratio^j = base * ratio^start / (1 - ratio)
    sum += base * rat_pow(ratio, unsigned(start)) / (1 - ratio);
  }
  return sum;
}

Rat theta_for_stage(const StripSchedule& s, int k) {
  // largest dyadic 2^-j meeting both inequalities with a 2x margin
  Rat inv_eta = s.eta;  // eta
  Rat bound2 = pow2(k + 2) / (1 - s.eta);  // 2 * 2^(k+1)/(1-eta)
  for (int j = 1; j < 512; ++j) {
    Rat A = pow2(j) - 1;  // (1-theta)/theta for theta = 2^-j
    // A >= 2 * 5/sqrt(eta)  <=>  A^2 * eta >= 100
    if (!(A * A * inv_eta >= 100)) continue;
    // A - 5/sqrt(eta) >= 2 * 2^(k+1)/(1-eta)
    Rat rem = A - bound2;
    if (rem <= 0) continue;
    if (!(rem * rem * inv_eta >= 25)) continue;
    return pow2(-j);
  }
  throw std::runtime_error("theta_for_stage: no admissible dyadic");
}

void recompute_crossings(StripSchedule& s) {
  for (int k = 1; k <= int(s.stages.size()); ++k) {
    Stage& st = s.stages[size_t(k - 1)];
    st.crossings.clear();
    RLine lk = st.line().eq;
    std::set<std::pair<std::string, std::string>> seen;
    for (const RLine& l : s.boundary_lines(k - 1)) {
      auto p = lk.intersect(l);
      if (!p) continue;
      if (!s.window.contains(*p)) continue;
      auto key = std::make_pair(p->x.get_str(), p->y.get_str());
      if (seen.insert(key).second) st.crossings.push_back(*p);
    }
  }
}

namespace {

void add_issue(Certificate& cert, const std::string& cond, int idx, double lhs,
               double rhs, const std::string& detail) {
  cert.issues.push_back({cond, idx, lhs, rhs, detail});
}

// squared distance from the excised, windowed stage line to the earlier
// boundary family; nullopt when the family is empty
std::optional<Rat> excised_dist2(const StripSchedule& s, int k) {
  const Stage& st = s.stages[size_t(k - 1)];
  std::vector<RLine> family = s.boundary_lines(k - 1);
  if (family.empty()) return std::nullopt;

  // parameter range of the line inside the window
  RVec dir = st.e.v;
  Rat tlo, thi;
  {
    // clip x(t) = x + t e against the window
    Rat lo("-100000"), hi("100000");
    auto clip = [&](const Rat& p, const Rat& d, const Rat& wlo, const Rat& whi) {
      if (d == 0) {
        if (p < wlo || p > whi) lo = 1, hi = 0;  // empty
        return;
      }
      Rat t0 = (wlo - p) / d, t1 = (whi - p) / d;
      if (t0 > t1) std::swap(t0, t1);
      lo = std::max(lo, t0);
      hi = std::min(hi, t1);
    };
    clip(st.x.x, dir.x, s.window.x0, s.window.x1);
    clip(st.x.y, dir.y, s.window.y0, s.window.y1);
    tlo = lo;
    thi = hi;
  }
  if (tlo > thi) return std::nullopt;

  // guard intervals along the line
  std::vector<std::pair<Rat, Rat>> guards;
  for (const RVec& c : st.crossings) {
    Rat t = (c - st.x).dot(dir);
    guards.emplace_back(t - st.delta, t + st.delta);
  }
  std::sort(guards.begin(), guards.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<Rat, Rat>> merged;
  for (auto& g : guards) {
    if (!merged.empty() && g.first <= merged.back().second)
      merged.back().second = std::max(merged.back().second, g.second);
    else
      merged.push_back(g);
  }

  std::vector<Rat> candidates;
  auto excised = [&](const Rat& t) {
    for (auto& g : merged)
      if (t > g.first && t < g.second) return true;
    return false;
  };
  if (!excised(tlo)) candidates.push_back(tlo);
  if (!excised(thi)) candidates.push_back(thi);
  for (auto& g : merged) {
    if (g.first >= tlo && g.first <= thi) candidates.push_back(g.first);
    if (g.second >= tlo && g.second <= thi) candidates.push_back(g.second);
  }
  if (candidates.empty()) return std::nullopt;  // line fully excised

  std::optional<Rat> best;
  for (const RLine& l : family) {
    for (const Rat& t : candidates) {
      RVec p = st.x + dir * t;
      Rat d2 = l.dist2(p);
      if (!best || d2 < *best) best = d2;
    }
  }
  return best;
}

}  // namespace

Certificate validate_schedule(const StripSchedule& s) {
  Certificate cert;
  cert.depth = s.depth;
  cert.checked = {"cone", "rho-summability", "theta", "tail", "guard-budget",
                  "float-floor"};

  const int K = s.depth;
  if (int(s.stages.size()) != K) {
    add_issue(cert, "structure", 0, double(s.stages.size()), double(K),
              "stage count differs from depth");
    return cert;
  }

  // (v) direction cone
  for (int k = 1; k <= K; ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    Rat d = s.w.dot(st.e);
    if (!(d >= 1 - s.eta))
      add_issue(cert, "cone", k, to_double(d), to_double(1 - s.eta),
                "direction outside C(w, eta)");
  }

  // (i) 12 * sum_{k>=p} 3^k rho_k <= 4^-p for p = 0..K
  for (int p = 0; p <= K; ++p) {
    Rat sum(0);
    for (int k = std::max(p, 1); k <= K; ++k)
      sum += rat_pow(Rat(3), unsigned(k)) * s.stages[size_t(k - 1)].rho;
    if (s.rho_rule) {
      const auto& [base, ratio] = *s.rho_rule;
      Rat q = 3 * ratio;
      if (q >= 1) {
        add_issue(cert, "rho-summability", p, to_double(q), 1.0,
                  "3*ratio >= 1: tail diverges");
        continue;
      }
      sum += base * rat_pow(q, unsigned(K + 1)) / (1 - q);
    }
    Rat lhs = 12 * sum;
    Rat rhs = rat_pow(Rat(1, 4), unsigned(p));
    if (!(lhs <= rhs))
      add_issue(cert, "rho-summability", p, to_double(lhs), to_double(rhs),
                "12*sum 3^k rho_k exceeds 4^-p");
  }

  // (ii) rho_k < theta_k * c_k
  for (int k = 1; k <= K; ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    auto c2 = excised_dist2(s, k);
    if (!c2) continue;  // empty earlier family: condition vacuous
    Rat theta = theta_for_stage(s, k);
    // rho < theta * c  <=>  rho^2 < theta^2 * c^2
    if (!(st.rho * st.rho < theta * theta * *c2))
      add_issue(cert, "theta", k, to_double(st.rho),
                to_double(theta) * std::sqrt(to_double(*c2)),
                "rho_k not below theta_k * dist(T_{k-1}, excised line)");
  }

  // (iii) (4/rho_k) * sum_{j>k} 2 rho_j / (1-eta) <= sqrt(eta)/16
  for (int k = 1; k <= K; ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    Rat lhs = Rat(8) * s.rho_tail(k) / (st.rho * (1 - s.eta));
    // lhs <= sqrt(eta)/16  <=>  256 lhs^2 <= eta
    if (!(256 * lhs * lhs <= s.eta))
      add_issue(cert, "tail", k, to_double(lhs),
                std::sqrt(to_double(s.eta)) / 16.0,
                "strip-width tail too heavy for the non-differentiability "
                "slack");
  }

  // (iv) sum |S_k| delta_k <= 1
  {
    Rat sum(0);
    for (const Stage& st : s.stages)
      sum += Rat(long(st.crossings.size())) * st.delta;
    if (!(sum <= 1))
      add_issue(cert, "guard-budget", 0, to_double(sum), 1.0,
                "sum |S_k| delta_k exceeds budget");
  }

  // float mirror of the smallest width must stay normal
  if (K >= 1) {
    double r = to_double(s.stages.back().rho);
    if (!(r > 0) || !std::isnormal(r))
      add_issue(cert, "float-floor", K, r, 2.2e-308,
                "rho_K underflows the double mirror");
  }

  cert.valid = cert.issues.empty();
  return cert;
}

StripSchedule generate_schedule(const Rat& eta, int depth, std::uint64_t seed,
                                Window window) {
  if (!(eta > 0) || !(1 - eta >= sqrt_lower(Rat(1, 2))))
    throw std::invalid_argument("eta outside (0, 1 - 1/sqrt(2)]");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  // float mirror: rho_K = 2^(-5-10K)
  if (5 + 10 * depth > 1020) throw InfeasibleSchedule("rho underflow", 101);

  StripSchedule s;
  s.w = RUnit(RVec(Rat(1), Rat(0)));
  s.eta = eta;
  s.depth = depth;
  s.eps0 = 4;
  s.rho_rule = std::make_pair(pow2(-5), pow2(-10));
  s.window = window;

  Rat tmax = sqrt_lower(eta / (2 - eta));
  const Rat sep(1, 128);
  {
    Rat capacity = 2 * tmax / sep;
    if (!(capacity >= Rat(depth)))
      throw InfeasibleSchedule(
          "direction grid exhausted for eta",
          int(to_double(capacity)));
  }

  Rng rng(seed);
  std::vector<Rat> tangents;
  for (int k = 1; k <= depth; ++k) {
    Rat t;
    bool ok = false;
    for (int attempt = 0; attempt < 4000 && !ok; ++attempt) {
      t = tmax * (2 * rng.uniform_rat(20) - 1);
      ok = true;
      for (const Rat& u : tangents)
        if (rat_abs(t - u) < sep) {
          ok = false;
          break;
        }
    }
    if (!ok) throw InfeasibleSchedule("direction sampling stalled", k - 1);
    tangents.push_back(t);

    Stage st;
    st.e = RUnit::from_tangent_half(t);
    st.rho = pow2(-5 - 10 * k);

    if (k == 1) {
      st.x = RVec(Rat(1, 4) + rng.uniform_rat(20) / 2,
                  Rat(1, 4) + rng.uniform_rat(20) / 2);
    } else {
      // steer the new line through an earlier boundary line inside the core
      // square so the crossing set is populated
      int j = 1 + int(rng.below(std::uint64_t(k - 1)));
      int side = rng.below(2) ? +1 : -1;
      RLine target = s.stages[size_t(j - 1)].strip().boundary(side);
      Rat u = Rat(1, 4) + rng.uniform_rat(20) / 2;
      // b != 0 for near-horizontal boundary lines
      Rat y = (Rat(target.c) - Rat(target.a) * u) / Rat(target.b);
      st.x = RVec(u, y);
    }
    s.stages.push_back(std::move(st));
    recompute_crossings(s);
    Stage& cur = s.stages.back();
    cur.delta = rat_pow(Rat(1, 4), unsigned(k)) /
                Rat(1 + long(cur.crossings.size()));
  }

  recompute_crossings(s);
  // delta depends on |S_k|; refresh after the final crossing pass
  for (int k = 1; k <= depth; ++k) {
    Stage& st = s.stages[size_t(k - 1)];
    st.delta = rat_pow(Rat(1, 4), unsigned(k)) /
               Rat(1 + long(st.crossings.size()));
  }

  s.cert = validate_schedule(s);
  if (!s.cert.valid) {
    std::ostringstream os;
    os << "generated schedule failed validation:";
    for (const auto& i : s.cert.issues)
      os << " [" << i.condition << "@" << i.index << "]";
    throw std::runtime_error(os.str());
  }
  return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json rat_to_json(const Rat& q) { return json(rat_str(q)); }

Rat rat_from_json(const json& j) {
  if (j.is_string()) return rat_parse(j.get<std::string>());
  if (j.is_number_integer()) return Rat(j.get<long>());
  if (j.is_number_float()) return rat_of_double(j.get<double>());
  throw std::invalid_argument("expected rational (string or number)");
}

json rvec_to_json(const RVec& v) {
  return json::array({rat_to_json(v.x), rat_to_json(v.y)});
}

RVec rvec_from_json(const json& j) {
  return RVec(rat_from_json(j.at(0)), rat_from_json(j.at(1)));
}

// snap a nearly-unit rational vector onto the exact unit circle with the
// tangent half-angle map (an exact-unit input is reproduced verbatim)
RUnit runit_from_json(const json& j) {
  RVec v = rvec_from_json(j);
  if (v.norm2() == 1) return RUnit(v);
  if (v.x == -1 || v.x + 1 == 0)
    throw std::invalid_argument("direction too close to (-1,0) to snap");
  Rat t = v.y / (1 + v.x);
  return RUnit::from_tangent_half(t);
}

}  // namespace

std::string schedule_to_json(const StripSchedule& s, bool include_cert) {
  json j;
  j["format"] = "unrect-schedule-v1";
  j["w"] = rvec_to_json(s.w.v);
  j["eta"] = rat_to_json(s.eta);
  j["depth"] = s.depth;
  j["eps0"] = rat_to_json(s.eps0);
  j["window"] = json::array({rat_to_json(s.window.x0), rat_to_json(s.window.y0),
                             rat_to_json(s.window.x1), rat_to_json(s.window.y1)});
  if (s.rho_rule) {
    j["rho_rule"] = {{"base", rat_to_json(s.rho_rule->first)},
                     {"ratio", rat_to_json(s.rho_rule->second)}};
  }
  j["stages"] = json::array();
  for (const Stage& st : s.stages) {
    json e;
    e["x"] = rvec_to_json(st.x);
    e["e"] = rvec_to_json(st.e.v);
    e["rho"] = rat_to_json(st.rho);
    e["delta"] = rat_to_json(st.delta);
    e["crossings"] = json::array();
    for (const RVec& c : st.crossings) e["crossings"].push_back(rvec_to_json(c));
    j["stages"].push_back(std::move(e));
  }
  if (include_cert) {
    json c;
    c["valid"] = s.cert.valid;
    c["depth"] = s.cert.depth;
    c["checked"] = s.cert.checked;
    c["issues"] = json::array();
    for (const auto& i : s.cert.issues) {
      c["issues"].push_back({{"condition", i.condition},
                             {"index", i.index},
                             {"lhs", i.lhs},
                             {"rhs", i.rhs},
                             {"detail", i.detail}});
    }
    j["certificate"] = std::move(c);
  }
  return j.dump(2) + "\n";
}

StripSchedule schedule_from_json(const std::string& text) {
  json j = json::parse(text);
  StripSchedule s;
  s.w = runit_from_json(j.at("w"));
  s.eta = rat_from_json(j.at("eta"));
  if (j.contains("depth"))
    s.depth = j.at("depth").get<int>();
  else
    s.depth = j.at("K").get<int>();  // accepted alias
  if (j.contains("eps0")) s.eps0 = rat_from_json(j.at("eps0"));
  if (j.contains("window")) {
    const auto& w = j.at("window");
    s.window = Window(rat_from_json(w.at(0)), rat_from_json(w.at(1)),
                      rat_from_json(w.at(2)), rat_from_json(w.at(3)));
  }
  if (j.contains("rho_rule")) {
    s.rho_rule = std::make_pair(rat_from_json(j.at("rho_rule").at("base")),
                                rat_from_json(j.at("rho_rule").at("ratio")));
  }
  for (const auto& e : j.at("stages")) {
    Stage st;
    st.x = rvec_from_json(e.at("x"));
    st.e = runit_from_json(e.at("e"));
    st.rho = rat_from_json(e.at("rho"));
    if (e.contains("delta")) st.delta = rat_from_json(e.at("delta"));
    s.stages.push_back(std::move(st));
  }
  if (int(s.stages.size()) != s.depth)
    throw std::invalid_argument("stage count differs from depth");
  recompute_crossings(s);
  // default guard radii when absent
  for (int k = 1; k <= s.depth; ++k) {
    Stage& st = s.stages[size_t(k - 1)];
    if (st.delta == 0)
      st.delta = rat_pow(Rat(1, 4), unsigned(k)) /
                 Rat(1 + long(st.crossings.size()));
  }
  return s;
}

StripSchedule schedule_load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schedule file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return schedule_from_json(ss.str());
}

void schedule_save(const StripSchedule& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write schedule file: " + path);
  out << schedule_to_json(s);
}

}  // namespace unrect
