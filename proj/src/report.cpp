#include "report.hpp"

#include "detectors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace unrect {

std::string csv_double(double d) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

namespace {

std::string csv_quote(const std::string& s) {
  bool needs = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string CsvTable::to_string() const {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += csv_quote(header[i]);
  }
  out += '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_quote(row[i]);
    }
    out += '\n';
  }
  return out;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  int nt = std::min(jobs, n);
  std::vector<std::thread> threads;
  threads.reserve(size_t(nt));
  for (int t = 0; t < nt; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

RVec sample_strip_point(const Construction& c, int k, Rng& rng) {
  const Stage& st = c.schedule().stages[size_t(k - 1)];
  for (int attempt = 0; attempt < 10000; ++attempt) {
    // parameter chosen so the x-coordinate lands inside (1/8, 7/8)
    Rat xtarget = Rat(1, 8) + rng.uniform_rat(24) * Rat(3, 4);
    Rat t = (xtarget - st.x.x) / st.e.v.x;
    Rat off = st.rho * (2 * rng.uniform_rat(24) - 1) * Rat(63, 64);
    RVec z = st.x + st.e.v * t + st.e.perp().v * off;
    if (!c.in_strip(k, z)) continue;
    if (c.in_guard_ball(k, z)) continue;
    return z;
  }
  throw std::runtime_error("could not sample a strip point off guard balls");
}

RUnit sample_witness_direction(const Construction& c, Rng& rng) {
  const StripSchedule& s = c.schedule();
  // the complement of the excluded double cone is nonempty iff 3 sqrt(eta)
  // stays below one
  if (!(9 * s.eta < 1))
    throw WitnessPrecondition(
        "the excluded double cone covers every direction at this eta");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    // steep directions: tangent half-angle near 1 gives directions near
    // (0,1), far from w; accept on the exact cone test
    Rat t = Rat(1, 2) + rng.uniform_rat(24);  // in [1/2, 3/2)
    RUnit v = RUnit::from_tangent_half(t);
    Rat dw = rat_abs(v.v.dot(s.w.v));
    Rat gap = 1 - dw;
    if (gap > 0 && gap * gap > 9 * s.eta) return v;
  }
  throw std::runtime_error("could not sample a direction outside the cone");
}

std::string nondiff_map_csv(const Construction& c, int grid, int dirs,
                            double eps_floor, std::uint64_t seed, int jobs) {
  CsvTable t;
  t.header = {"x",       "y",      "in_E_proxy", "in_G_proxy", "m_depth",
              "zeta_lb", "dir_x",  "dir_y",      "eps",        "witness_id"};
  (void)seed;
  Rat eps = rat_of_double(eps_floor);
  const int n = grid * grid;
  std::vector<std::vector<std::string>> rows(static_cast<size_t>(n));
  parallel_for(n, jobs, [&](int idx) {
    int i = idx / grid, j = idx % grid;
    RVec z(Rat(2 * i + 1) / Rat(2 * grid), Rat(2 * j + 1) / Rat(2 * grid));
    Construction::Classification cls = c.classify(z);
    UpsilonResult up = upsilon_h(c, z, eps, dirs, c.depth());
    rows[size_t(idx)] = {
        csv_double(to_double(z.x)),
        csv_double(to_double(z.y)),
        cls.in_E_proxy ? "1" : "0",
        cls.in_G_proxy ? "1" : "0",
        std::to_string(cls.m_depth),
        csv_double(to_double(up.value)),
        csv_double(to_double(up.argmax.v.x)),
        csv_double(to_double(up.argmax.v.y)),
        csv_double(eps_floor),
        "p" + std::to_string(i) + "_" + std::to_string(j),
    };
  });
  t.rows = std::move(rows);
  return t.to_string();
}

std::string eval_grid_csv(const Construction& c, int grid, int depth,
                          int jobs) {
  CsvTable t;
  t.header = {"x", "y", "h", "grad_x", "grad_y", "on_kink", "m", "tail_bound"};
  const int n = grid * grid;
  double tail = to_double(c.h_tail_bound(depth));
  std::vector<std::vector<std::string>> rows(static_cast<size_t>(n));
  parallel_for(n, jobs, [&](int idx) {
    int i = idx / grid, j = idx % grid;
    RVec z(Rat(2 * i + 1) / Rat(2 * grid), Rat(2 * j + 1) / Rat(2 * grid));
    Construction::PointState ps = c.evaluate(z, depth);
    bool kink = !ps.gradients_valid(depth);
    rows[size_t(idx)] = {
        csv_double(to_double(z.x)),
        csv_double(to_double(z.y)),
        csv_double(to_double(ps.h[size_t(depth)])),
        kink ? "" : csv_double(to_double(ps.dh[size_t(depth)].x)),
        kink ? "" : csv_double(to_double(ps.dh[size_t(depth)].y)),
        kink ? "1" : "0",
        std::to_string(ps.m[size_t(depth)]),
        csv_double(tail),
    };
  });
  t.rows = std::move(rows);
  return t.to_string();
}

namespace {

void push_report(CsvTable& t, const CheckReport& r, const std::string& subject,
                 int index) {
  t.rows.push_back({r.check_id, subject, std::to_string(index),
                    csv_double(r.lhs), csv_double(r.rhs), r.pass ? "1" : "0",
                    csv_double(r.error_bar), r.note});
}

void push_na(CsvTable& t, const std::string& check, const std::string& subject,
             int index, const std::string& why) {
  t.rows.push_back({check, subject, std::to_string(index), "", "", "N/A", "",
                    why});
}

void push_skipped(CsvTable& t, const std::string& check,
                  const std::string& subject, int index,
                  const std::string& why) {
  t.rows.push_back({check, subject, std::to_string(index), "", "", "SKIPPED",
                    "", why});
}

}  // namespace

std::string curve_report_csv(const Construction& c, const C1Curve& curve,
                             std::uint64_t seed) {
  (void)seed;
  CsvTable t;
  t.header = {"check_id", "subject", "index", "lhs", "rhs",
              "pass",     "error_bar", "note"};
  const StripSchedule& s = c.schedule();
  double eta = to_double(s.eta);
  UnitVec w(to_double(s.w.v.x), to_double(s.w.v.y));

  // cone hypothesis for the filtration machinery
  bool cone_ok = true;
  {
    Cone cone(w, 2 * eta, false);
    for (int i = 0; i <= 512; ++i) {
      double sp = curve.length() * i / 512;
      Vec2 d = curve.deriv(sp);
      if (!cone_contains(cone, UnitVec(d.x, d.y))) {
        cone_ok = false;
        break;
      }
    }
  }

  // guard-ball crossing bound (v = w, delta = 2 eta)
  for (int k = 1; k <= c.depth(); ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    if (!cone_ok) {
      push_na(t, "crossing-bound-guard", "stage", k,
              "cone hypothesis not satisfied");
      continue;
    }
    int bi = 0;
    for (const RVec& ctr : st.crossings) {
      BallRegion ball{to_vec2(ctr), to_double(st.delta)};
      try {
        CheckReport rep =
            crossing_bound_check(curve, Region(ball), w, 2 * eta);
        rep.check_id = "crossing-bound-guard";
        rep.note = "ball " + std::to_string(bi);
        push_report(t, rep, "stage", k);
      } catch (const TangencyError& e) {
        push_skipped(t, "crossing-bound-guard", "stage", k, e.what());
      }
      ++bi;
    }
  }

  // strip crossing bound with v = e_k^perp needs transversal tangents;
  // cone-following curves get an N/A row
  for (int k = 1; k <= c.depth(); ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    double rho = to_double(st.rho);
    UnitVec ekp(to_double(st.e.perp().v.x), to_double(st.e.perp().v.y));
    StripRegion strip{to_vec2(st.x),
                      Vec2(to_double(st.e.v.x), to_double(st.e.v.y)), rho};
    try {
      CheckReport rep = crossing_bound_check(curve, Region(strip), ekp, 0.9);
      rep.check_id = "crossing-bound-strip";
      push_report(t, rep, "stage", k);
    } catch (const std::invalid_argument&) {
      push_na(t, "crossing-bound-strip", "stage", k,
              "tangents outside the transversal cone");
    } catch (const TangencyError& e) {
      push_skipped(t, "crossing-bound-strip", "stage", k, e.what());
    }
  }

  // convex slope integral against the windowed strip parallelograms
  for (int k = 1; k <= c.depth(); ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    if (to_double(st.rho) <= 1e-14) {
      push_skipped(t, "convex-cell-bound", "stage", k,
                   "strip below float resolution");
      continue;
    }
    Window win = c.stage_window(k);
    Vec2 e(to_double(st.e.v.x), to_double(st.e.v.y));
    Vec2 n = e.perp();
    double rho = to_double(st.rho);
    Vec2 base = to_vec2(st.x);
    double t0 = (to_double(win.x0) - base.x) / e.x;
    double t1 = (to_double(win.x1) - base.x) / e.x;
    PolyRegion P;
    P.pts = {base + e * t0 - n * rho, base + e * t1 - n * rho,
             base + e * t1 + n * rho, base + e * t0 + n * rho};
    UnitVec eu(e.x, e.y);
    try {
      CheckReport rep = convex_slope_integral_check(curve, P, eu);
      push_report(t, rep, "stage", k);
    } catch (const std::invalid_argument&) {
      push_na(t, "convex-cell-bound", "stage", k,
              "monotonicity precondition violated");
    } catch (const TangencyError& e2) {
      push_skipped(t, "convex-cell-bound", "stage", k, e2.what());
    }
  }

  if (cone_ok) {
    Filtration f = build_filtration(c, curve, c.depth());
    for (int k = 1; k <= f.resolvable_depth; ++k) {
      for (int p = 1; p <= std::min(f.p_max, 4); ++p) {
        for (const CheckReport& rep :
             strip_slope_integral_check(c, curve, f, k, p)) {
          push_report(t, rep, "stage", k);
        }
      }
    }
    for (int p = 1; p <= f.p_max; ++p) {
      DpResult dp = dp_diagnostic(c, f, p);
      CheckReport rep;
      rep.check_id = "dp-measure";
      rep.lhs = dp.measure;
      rep.rhs = dp.bound;
      rep.pass = dp.pass;
      rep.error_bar = 1e-9;
      rep.note = "integral " + csv_double(dp.integral) + " vs 4^-p " +
                 csv_double(dp.expectation_bound);
      push_report(t, rep, "level", p);
      push_report(t, ratio_approx_check(c, f, p, 2 * eta), "level", p);
    }
  } else {
    push_na(t, "dp-measure", "curve", 0, "cone hypothesis not satisfied");
  }
  return t.to_string();
}

std::string martingale_report_csv(const Construction& c, const C1Curve& curve,
                                  const std::vector<double>& lambdas) {
  CsvTable t;
  t.header = {"check_id", "subject", "index", "lhs", "rhs",
              "pass",     "error_bar", "note"};
  const StripSchedule& s = c.schedule();
  UnitVec w(to_double(s.w.v.x), to_double(s.w.v.y));

  Filtration f = build_filtration(c, curve, c.depth());
  MuV mu = build_mu_v(curve, f, w);
  ProcessSample X = ratio_process(f, w);

  {
    CheckReport rep;
    rep.check_id = "martingale-residual";
    rep.lhs = martingale_residual(X, f, mu);
    rep.rhs = 1e-8;
    rep.error_bar = 1e-12;
    rep.pass = rep.lhs <= rep.rhs + rep.error_bar;
    rep.note = "ratio process under mu^v";
    push_report(t, rep, "curve", 0);
  }
  {
    AltSumReport rep = alternating_sum_check(X, f, mu);
    CheckReport row;
    row.check_id = "alt-sum-l2";
    row.lhs = rep.max_l2;
    row.rhs = 2 * rep.sup_level_l2;
    row.pass = rep.l2_ok;
    row.error_bar = 1e-12;
    row.note = rep.submartingale_ok ? "submartingale step ok"
                                    : "submartingale step FAILED";
    push_report(t, row, "curve", 0);

    CheckReport row2;
    row2.check_id = "alt-sum-martingale";
    row2.lhs = rep.max_martingale_residual;
    row2.rhs = 1e-8;
    row2.pass = rep.max_martingale_residual <= 1e-8;
    row2.error_bar = 1e-12;
    push_report(t, row2, "curve", 0);
  }
  int li = 0;
  for (double lambda : lambdas) {
    DoobReport rep = doob_tail_check(curve, f, w, lambda, mu);
    CheckReport row;
    row.check_id = "doob-tail";
    row.lhs = rep.exceedance;
    row.rhs = rep.bound;
    row.pass = rep.pass;
    row.error_bar = 1e-9;
    row.note = "lambda " + csv_double(lambda) + ", mu-bound " +
               csv_double(rep.mu_bound);
    push_report(t, row, "lambda", li++);
  }
  // per-atom values of the ratio process (level, atom, value, mass)
  for (size_t p = 0; p < f.levels.size(); ++p) {
    const CurvePartition& part = f.levels[p];
    for (size_t a = 0; a < part.atoms.size(); ++a) {
      std::vector<int> atom_intervals = part.atoms[a].intervals;
      double mass = mu_v_mass(mu, f, atom_intervals);
      t.rows.push_back({"ratio-atom-value", "level", std::to_string(p),
                        csv_double(X.values[p][a]), csv_double(mass), "",
                        "", "atom " + std::to_string(a)});
    }
  }
  return t.to_string();
}

std::string witness_report_json(const Construction& c, int stage, int count,
                                std::uint64_t seed, int jobs) {
  const StripSchedule& s = c.schedule();
  // sample inputs sequentially for determinism, evaluate in parallel
  Rng rng(seed ^ (0x9e37u + std::uint64_t(stage)));
  std::vector<std::pair<RVec, RUnit>> inputs;
  inputs.reserve(size_t(count));
  for (int i = 0; i < count; ++i)
    inputs.emplace_back(sample_strip_point(c, stage, rng),
                        sample_witness_direction(c, rng));

  std::vector<std::string> rows(static_cast<size_t>(count));
  Rat eps = 4 * s.stages[size_t(stage - 1)].rho;  // above 2 rho/sqrt(eta)
  {
    Rat need2 = 4 * s.stages[size_t(stage - 1)].rho *
                s.stages[size_t(stage - 1)].rho / s.eta;
    while (eps * eps <= need2) eps *= 2;
  }
  parallel_for(count, jobs, [&](int i) {
    nlohmann::json j;
    ChordWitness pw = nondiff_witness_phi(c, stage, inputs[size_t(i)].first,
                                          inputs[size_t(i)].second);
    j["phi"] = nlohmann::json::parse(witness_to_json(pw));
    try {
      HWitness hw = nondiff_witness_h(c, inputs[size_t(i)].first,
                                      inputs[size_t(i)].second, eps,
                                      c.depth());
      j["h"] = nlohmann::json::parse(witness_to_json(hw.witness));
      j["h_stage"] = hw.stage;
      j["h_m"] = hw.m_tilde;
      j["h_bound"] = to_double(hw.bound);
      j["h_tail_slack"] = to_double(hw.tail_slack);
      j["h_pass"] = hw.pass;
    } catch (const WitnessPrecondition& e) {
      j["h_error"] = e.what();
    }
    rows[size_t(i)] = j.dump();
  });
  std::string out = "[\n";
  for (int i = 0; i < count; ++i) {
    out += rows[size_t(i)];
    if (i + 1 < count) out += ",";
    out += "\n";
  }
  out += "]\n";
  return out;
}

std::string construction_stats_json(const Construction& c) {
  nlohmann::json j;
  const StripSchedule& s = c.schedule();
  j["depth"] = c.depth();
  j["eta"] = rat_str(s.eta);
  j["tail_bound"] = to_double(c.h_tail_bound(c.depth()));
  j["stages"] = nlohmann::json::array();
  for (int k = 1; k <= c.depth(); ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    nlohmann::json e;
    e["k"] = k;
    e["rho"] = to_double(st.rho);
    e["delta"] = to_double(st.delta);
    e["crossings"] = st.crossings.size();
    int comps = c.strip_component_count(k);
    e["strip_components"] = comps;
    e["component_cap"] = std::pow(3.0, k);
    e["component_cap_ok"] = double(comps) <= std::pow(3.0, k);
    j["stages"].push_back(std::move(e));
  }
  double lip = c.measured_lipschitz(c.depth(), 48, 12345);
  j["lipschitz_measured"] = lip;
  // empirical constant of the stagewise bound Lip(h_K) <= C * sum_j
  // (2^-j + eps(j)); the series evaluates to 2 + eps0 + pi^2/6
  double series = 2.0 + to_double(s.eps0) + M_PI * M_PI / 6.0;
  j["lipschitz_empirical_constant"] = lip / series;
  return j.dump(2) + "\n";
}

}  // namespace unrect
