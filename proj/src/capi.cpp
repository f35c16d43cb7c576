#include "unrect.h"

#include "construction.hpp"
#include "curves.hpp"
#include "detectors.hpp"
#include "martingale.hpp"
#include "report.hpp"
#include "schedule.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <string>

using namespace unrect;

struct unrect_schedule {
  StripSchedule s;
};
struct unrect_construction {
  Construction c;
};
struct unrect_curve {
  C1Curve c;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// classify exceptions into status codes
template <typename Fn>
unrect_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const LineCapExceeded& e) {
    set_error(e.what());
    return UNRECT_ERR_OVERFLOW;
  } catch (const CrossingCapExceeded& e) {
    set_error(e.what());
    return UNRECT_ERR_OVERFLOW;
  } catch (const TangencyError& e) {
    set_error(e.what());
    return UNRECT_ERR_TANGENCY;
  } catch (const InfeasibleSchedule& e) {
    set_error(std::string(e.what()) +
              " (max feasible depth: " + std::to_string(e.max_feasible) + ")");
    return UNRECT_ERR_INFEASIBLE;
  } catch (const OnLineGradient& e) {
    set_error(e.what());
    return UNRECT_ERR_ON_LINE;
  } catch (const WitnessPrecondition& e) {
    set_error(e.what());
    return UNRECT_ERR_ARGUMENT;
  } catch (const nlohmann::json::exception& e) {
    set_error(e.what());
    return UNRECT_ERR_PARSE;
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return UNRECT_ERR_ARGUMENT;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return UNRECT_ERR_ARGUMENT;
  } catch (const std::runtime_error& e) {
    // IO failures surface as runtime_error from the loaders
    std::string what = e.what();
    set_error(what);
    if (what.find("cannot open") != std::string::npos ||
        what.find("cannot write") != std::string::npos)
      return UNRECT_ERR_IO;
    return UNRECT_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return UNRECT_ERR_INTERNAL;
  }
}

RUnit snap_unit(double x, double y) {
  // exact rational direction via the tangent half-angle of the float input;
  // exact-unit rational inputs pass through unchanged
  Rat rx = rat_of_double(x), ry = rat_of_double(y);
  RVec v(rx, ry);
  if (v.norm2() == 1) return RUnit(v);
  double n = std::hypot(x, y);
  if (!(n > 0)) throw std::invalid_argument("zero direction");
  if (x < 0 && y == 0) return RUnit(RVec(Rat(-1), Rat(0)));
  Rat t = rat_of_double(y / (n + x));
  return RUnit::from_tangent_half(t);
}

}  // namespace

extern "C" {

const char* unrect_version(void) { return "unrect 0.1.0"; }

const char* unrect_last_error(void) { return g_last_error.c_str(); }

void unrect_string_free(char* s) { delete[] s; }

/* ------------------------------------------------------------------ */

unrect_status unrect_schedule_generate(double eta, int depth, uint64_t seed,
                                       unrect_schedule** out) {
  if (!out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    auto s = generate_schedule(rat_of_double(eta), depth, seed);
    *out = new unrect_schedule{std::move(s)};
    return UNRECT_OK;
  });
}

unrect_status unrect_schedule_load(const char* path, unrect_schedule** out) {
  if (!path || !out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    auto s = schedule_load(path);
    *out = new unrect_schedule{std::move(s)};
    return UNRECT_OK;
  });
}

unrect_status unrect_schedule_from_json(const char* json,
                                        unrect_schedule** out) {
  if (!json || !out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    auto s = schedule_from_json(json);
    *out = new unrect_schedule{std::move(s)};
    return UNRECT_OK;
  });
}

unrect_status unrect_schedule_validate(unrect_schedule* s,
                                       char** report_json) {
  if (!s) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    s->s.cert = validate_schedule(s->s);
    if (report_json) {
      nlohmann::json j;
      j["valid"] = s->s.cert.valid;
      j["checked"] = s->s.cert.checked;
      j["issues"] = nlohmann::json::array();
      for (const auto& i : s->s.cert.issues)
        j["issues"].push_back({{"condition", i.condition},
                               {"index", i.index},
                               {"lhs", i.lhs},
                               {"rhs", i.rhs},
                               {"detail", i.detail}});
      *report_json = dup_string(j.dump(2));
    }
    if (!s->s.cert.valid) {
      set_error("schedule failed validation");
      return UNRECT_ERR_VALIDATION;
    }
    return UNRECT_OK;
  });
}

unrect_status unrect_schedule_to_json(const unrect_schedule* s,
                                      int include_certificate, char** out) {
  if (!s || !out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *out = dup_string(schedule_to_json(s->s, include_certificate != 0));
    return UNRECT_OK;
  });
}

unrect_status unrect_schedule_save(const unrect_schedule* s,
                                   const char* path) {
  if (!s || !path) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    schedule_save(s->s, path);
    return UNRECT_OK;
  });
}

int unrect_schedule_depth(const unrect_schedule* s) {
  return s ? s->s.depth : -1;
}

double unrect_schedule_eta(const unrect_schedule* s) {
  return s ? to_double(s->s.eta) : -1;
}

void unrect_schedule_free(unrect_schedule* s) { delete s; }

/* ------------------------------------------------------------------ */

unrect_status unrect_construction_build(const unrect_schedule* s, int depth,
                                        unrect_construction** out) {
  if (!s || !out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *out = new unrect_construction{Construction(s->s, depth)};
    return UNRECT_OK;
  });
}

void unrect_construction_free(unrect_construction* c) { delete c; }

unrect_status unrect_h_eval(const unrect_construction* c, double x, double y,
                            int depth, double* value, double* tail_bound) {
  if (!c || !value) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    RVec z(rat_of_double(x), rat_of_double(y));
    *value = to_double(c->c.h_value(z, depth));
    if (tail_bound) *tail_bound = to_double(c->c.h_tail_bound(depth));
    return UNRECT_OK;
  });
}

unrect_status unrect_h_gradient(const unrect_construction* c, double x,
                                double y, int depth, double* gx, double* gy) {
  if (!c || !gx || !gy) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    RVec z(rat_of_double(x), rat_of_double(y));
    RVec g = c->c.h_gradient(z, depth);
    *gx = to_double(g.x);
    *gy = to_double(g.y);
    return UNRECT_OK;
  });
}

unrect_status unrect_point_profile(const unrect_construction* c, double x,
                                   double y, char** json_out) {
  if (!c || !json_out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    RVec z(rat_of_double(x), rat_of_double(y));
    Construction::PointState ps = c->c.evaluate(z);
    Construction::Classification cls = c->c.classify(z);
    nlohmann::json j;
    j["k_list"] = ps.k_list;
    j["sigma"] = ps.sigma;
    j["m"] = ps.m;
    j["h"] = to_double(ps.h.back());
    j["first_kink"] = ps.first_kink;
    j["in_E_proxy"] = cls.in_E_proxy;
    j["in_G_proxy"] = cls.in_G_proxy;
    j["H_candidate_proxy"] = cls.H_candidate_proxy;
    j["m_depth"] = cls.m_depth;
    j["proxy_note"] =
        "depth-limited stand-ins for the limit sets; tail window "
        "[ceil(K/2), K]";
    *json_out = dup_string(j.dump(2));
    return UNRECT_OK;
  });
}

unrect_status unrect_zeta(const unrect_construction* c, double x, double y,
                          double eps, double ex, double ey, double* value,
                          char** witness_json) {
  if (!c || !value || !(eps > 0)) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    RVec z(rat_of_double(x), rat_of_double(y));
    ZetaResult r =
        zeta_h(c->c, z, rat_of_double(eps), snap_unit(ex, ey), c->c.depth());
    *value = to_double(r.value);
    if (witness_json) *witness_json = dup_string(witness_to_json(r.witness));
    return UNRECT_OK;
  });
}

unrect_status unrect_upsilon(const unrect_construction* c, double x, double y,
                             double eps, int direction_budget, double* value) {
  if (!c || !value || !(eps > 0) || direction_budget < 8)
    return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    RVec z(rat_of_double(x), rat_of_double(y));
    UpsilonResult r = upsilon_h(c->c, z, rat_of_double(eps), direction_budget,
                                c->c.depth());
    *value = to_double(r.value);
    return UNRECT_OK;
  });
}

unrect_status unrect_witness_phi(const unrect_construction* c, int stage,
                                 double zx, double zy, double vx, double vy,
                                 char** witness_json) {
  if (!c || !witness_json) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    RVec z(rat_of_double(zx), rat_of_double(zy));
    ChordWitness w = nondiff_witness_phi(c->c, stage, z, snap_unit(vx, vy));
    *witness_json = dup_string(witness_to_json(w));
    return UNRECT_OK;
  });
}

unrect_status unrect_witness_h(const unrect_construction* c, double zx,
                               double zy, double vx, double vy, double eps,
                               char** witness_json) {
  if (!c || !witness_json || !(eps > 0)) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    RVec z(rat_of_double(zx), rat_of_double(zy));
    HWitness w = nondiff_witness_h(c->c, z, snap_unit(vx, vy),
                                   rat_of_double(eps), c->c.depth());
    nlohmann::json j = nlohmann::json::parse(witness_to_json(w.witness));
    j["stage"] = w.stage;
    j["m"] = w.m_tilde;
    j["bound"] = to_double(w.bound);
    j["tail_slack"] = to_double(w.tail_slack);
    j["pass"] = w.pass;
    *witness_json = dup_string(j.dump());
    return UNRECT_OK;
  });
}

/* ------------------------------------------------------------------ */

unrect_status unrect_curve_load(const char* path, unrect_curve** out) {
  if (!path || !out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *out = new unrect_curve{C1Curve::load(path)};
    return UNRECT_OK;
  });
}

unrect_status unrect_curve_from_json(const char* json, unrect_curve** out) {
  if (!json || !out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *out = new unrect_curve{C1Curve::from_json(json)};
    return UNRECT_OK;
  });
}

void unrect_curve_free(unrect_curve* c) { delete c; }

/* ------------------------------------------------------------------ */

unrect_status unrect_nondiff_map_csv(const unrect_construction* c, int grid,
                                     int dirs, double eps_floor, uint64_t seed,
                                     int jobs, char** csv_out) {
  if (!c || !csv_out || grid < 2 || dirs < 8 || !(eps_floor > 0))
    return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *csv_out =
        dup_string(nondiff_map_csv(c->c, grid, dirs, eps_floor, seed, jobs));
    return UNRECT_OK;
  });
}

unrect_status unrect_eval_grid_csv(const unrect_construction* c, int grid,
                                   int depth, int jobs, char** csv_out) {
  if (!c || !csv_out || grid < 2) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *csv_out = dup_string(eval_grid_csv(c->c, grid, depth, jobs));
    return UNRECT_OK;
  });
}

unrect_status unrect_curve_report_csv(const unrect_construction* c,
                                      const unrect_curve* curve, uint64_t seed,
                                      char** csv_out) {
  if (!c || !curve || !csv_out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *csv_out = dup_string(curve_report_csv(c->c, curve->c, seed));
    return UNRECT_OK;
  });
}

unrect_status unrect_martingale_report_csv(const unrect_construction* c,
                                           const unrect_curve* curve,
                                           const double* lambdas,
                                           int n_lambdas, char** csv_out) {
  if (!c || !curve || !csv_out || (n_lambdas > 0 && !lambdas))
    return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    std::vector<double> ls(lambdas, lambdas + n_lambdas);
    if (ls.empty()) ls = {0.5, 1, 2, 4};
    *csv_out = dup_string(martingale_report_csv(c->c, curve->c, ls));
    return UNRECT_OK;
  });
}

unrect_status unrect_witness_report_json(const unrect_construction* c,
                                         int stage, int count, uint64_t seed,
                                         int jobs, char** json_out) {
  if (!c || !json_out || stage < 1 || stage > c->c.depth() || count < 1)
    return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *json_out = dup_string(witness_report_json(c->c, stage, count, seed, jobs));
    return UNRECT_OK;
  });
}

unrect_status unrect_construction_stats(const unrect_construction* c,
                                        char** json_out) {
  if (!c || !json_out) return UNRECT_ERR_ARGUMENT;
  return guarded([&] {
    *json_out = dup_string(construction_stats_json(c->c));
    return UNRECT_OK;
  });
}

} /* extern "C" */
