// Command line front end for the unrect shared library. Talks to the core
// exclusively through the C API in unrect.h.
//
// Exit codes: 0 success, 1 usage/parse error, 2 check failure.

#include "unrect.h"

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace {

struct ScheduleDeleter {
  void operator()(unrect_schedule* s) const { unrect_schedule_free(s); }
};
struct ConstructionDeleter {
  void operator()(unrect_construction* c) const {
    unrect_construction_free(c);
  }
};
struct CurveDeleter {
  void operator()(unrect_curve* c) const { unrect_curve_free(c); }
};
using SchedulePtr = std::unique_ptr<unrect_schedule, ScheduleDeleter>;
using ConstructionPtr =
    std::unique_ptr<unrect_construction, ConstructionDeleter>;
using CurvePtr = std::unique_ptr<unrect_curve, CurveDeleter>;

struct Options {
  std::string schedule_path;
  int depth = 8;
  double eta = 1.0 / 16.0;
  int grid = 32;
  int dirs = 16;
  double eps_floor = 5e-9;
  std::string out_dir;
  int jobs = 0;
  std::uint64_t seed = 1;
  std::vector<std::string> curve_paths;
  int witness_stage = 1;
  int witness_count = 32;
};

int fail(const std::string& what, unrect_status st) {
  std::cerr << what << ": " << unrect_last_error() << "\n";
  if (st == UNRECT_ERR_PARSE || st == UNRECT_ERR_ARGUMENT ||
      st == UNRECT_ERR_IO)
    return 1;
  return 2;
}

std::string take_string(char* s) {
  std::string out = s ? s : "";
  unrect_string_free(s);
  return out;
}

int write_output(const Options& opt, const std::string& name,
                 const std::string& content) {
  if (opt.out_dir.empty()) {
    std::cout << content;
    return 0;
  }
  std::filesystem::create_directories(opt.out_dir);
  std::ofstream f(opt.out_dir + "/" + name);
  if (!f) {
    std::cerr << "cannot write " << opt.out_dir << "/" << name << "\n";
    return 1;
  }
  f << content;
  std::cerr << "wrote " << opt.out_dir << "/" << name << "\n";
  return 0;
}

// load or generate the schedule per options
int acquire_schedule(const Options& opt, SchedulePtr& out) {
  unrect_schedule* raw = nullptr;
  unrect_status st;
  if (!opt.schedule_path.empty()) {
    st = unrect_schedule_load(opt.schedule_path.c_str(), &raw);
    if (st != UNRECT_OK) return fail("loading schedule", st);
  } else {
    st = unrect_schedule_generate(opt.eta, opt.depth, opt.seed, &raw);
    if (st != UNRECT_OK) return fail("generating schedule", st);
  }
  out.reset(raw);
  // always validate before use
  char* report = nullptr;
  st = unrect_schedule_validate(out.get(), &report);
  std::string rep = take_string(report);
  if (st != UNRECT_OK) {
    std::cerr << rep;
    return fail("schedule validation", st);
  }
  return 0;
}

int acquire_construction(const Options& opt, const SchedulePtr& sched,
                         ConstructionPtr& out) {
  unrect_construction* raw = nullptr;
  int depth = std::min(opt.depth, unrect_schedule_depth(sched.get()));
  unrect_status st = unrect_construction_build(sched.get(), depth, &raw);
  if (st != UNRECT_OK) return fail("building construction", st);
  out.reset(raw);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"staged piecewise-affine construction laboratory"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--schedule", opt.schedule_path, "schedule JSON file")
      ->envname("UNRECT_SCHEDULE");
  app.add_option("--depth", opt.depth, "truncation depth K")
      ->envname("UNRECT_DEPTH");
  app.add_option("--eta", opt.eta, "cone width for generated schedules")
      ->envname("UNRECT_ETA");
  app.add_option("--grid", opt.grid, "grid resolution")->envname("UNRECT_GRID");
  app.add_option("--dirs", opt.dirs, "direction budget")
      ->envname("UNRECT_DIRS");
  app.add_option("--eps-floor", opt.eps_floor, "smallest detector scale")
      ->envname("UNRECT_EPS_FLOOR");
  app.add_option("--out", opt.out_dir, "output directory (default: stdout)")
      ->envname("UNRECT_OUT");
  app.add_option("--jobs", opt.jobs, "worker threads (0 = hardware)")
      ->envname("UNRECT_JOBS");
  app.add_option("--seed", opt.seed, "deterministic seed")
      ->envname("UNRECT_SEED");

  auto* validate =
      app.add_subcommand("validate", "validate a schedule file and append "
                                     "its certificate");
  std::string validate_path;
  validate->add_option("schedule", validate_path, "schedule JSON file")
      ->required();

  auto* build = app.add_subcommand(
      "build", "generate (or load) a schedule, build the construction and "
               "report stage statistics");

  auto* nondiff = app.add_subcommand(
      "nondiff-map", "per-grid-point classification proxies and detector "
                     "lower bounds");

  auto* curve_report = app.add_subcommand(
      "curve-report", "crossing, convex-cell, strip-slope and D_p checks for "
                      "curve files");
  curve_report->add_option("curves", opt.curve_paths, "curve JSON files")
      ->required();

  auto* mart_report = app.add_subcommand(
      "martingale-report", "filtration martingale residuals and tail bounds "
                           "for curve files");
  mart_report->add_option("curves", opt.curve_paths, "curve JSON files")
      ->required();

  auto* witness =
      app.add_subcommand("witness", "sample defect witnesses for one stage");
  witness->add_option("--stage", opt.witness_stage, "stage index");
  witness->add_option("--count", opt.witness_count, "number of witnesses");

  auto* eval_grid = app.add_subcommand(
      "eval-grid", "partial-sum values and gradients on a grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (opt.jobs <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    opt.jobs = hw ? int(hw) : 4;
  }

  if (validate->parsed()) {
    unrect_schedule* raw = nullptr;
    unrect_status st = unrect_schedule_load(validate_path.c_str(), &raw);
    if (st != UNRECT_OK) return fail("loading schedule", st);
    SchedulePtr sched(raw);
    char* report = nullptr;
    st = unrect_schedule_validate(sched.get(), &report);
    std::string rep = take_string(report);
    if (st == UNRECT_OK) {
      // append the certificate to the same document
      char* json = nullptr;
      if (unrect_schedule_to_json(sched.get(), 1, &json) == UNRECT_OK) {
        std::ofstream f(validate_path);
        f << take_string(json);
      }
      std::cout << rep;
      std::cerr << "schedule valid; certificate appended\n";
      return 0;
    }
    std::cout << rep;
    if (st == UNRECT_ERR_VALIDATION) {
      std::cerr << "schedule INVALID\n";
      return 2;
    }
    return fail("validating schedule", st);
  }

  SchedulePtr sched;
  if (int rc = acquire_schedule(opt, sched)) return rc;

  if (build->parsed()) {
    ConstructionPtr con;
    if (int rc = acquire_construction(opt, sched, con)) return rc;
    char* stats = nullptr;
    unrect_status st = unrect_construction_stats(con.get(), &stats);
    if (st != UNRECT_OK) return fail("collecting stats", st);
    char* sjson = nullptr;
    unrect_schedule_to_json(sched.get(), 1, &sjson);
    int rc = write_output(opt, "schedule.json", take_string(sjson));
    rc |= write_output(opt, "stats.json", take_string(stats));
    return rc;
  }

  ConstructionPtr con;
  if (int rc = acquire_construction(opt, sched, con)) return rc;

  if (nondiff->parsed()) {
    char* csv = nullptr;
    unrect_status st =
        unrect_nondiff_map_csv(con.get(), opt.grid, opt.dirs, opt.eps_floor,
                               opt.seed, opt.jobs, &csv);
    if (st != UNRECT_OK) return fail("nondiff-map", st);
    return write_output(opt, "nondiff_map.csv", take_string(csv));
  }

  if (eval_grid->parsed()) {
    char* csv = nullptr;
    unrect_status st = unrect_eval_grid_csv(
        con.get(), opt.grid, unrect_schedule_depth(sched.get()), opt.jobs,
        &csv);
    if (st != UNRECT_OK) return fail("eval-grid", st);
    return write_output(opt, "eval_grid.csv", take_string(csv));
  }

  if (witness->parsed()) {
    char* json = nullptr;
    unrect_status st =
        unrect_witness_report_json(con.get(), opt.witness_stage,
                                   opt.witness_count, opt.seed, opt.jobs,
                                   &json);
    if (st != UNRECT_OK) return fail("witness", st);
    return write_output(opt, "witnesses.json", take_string(json));
  }

  if (curve_report->parsed() || mart_report->parsed()) {
    int rc = 0;
    int idx = 0;
    for (const std::string& path : opt.curve_paths) {
      unrect_curve* craw = nullptr;
      unrect_status st = unrect_curve_load(path.c_str(), &craw);
      if (st != UNRECT_OK) return fail("loading curve " + path, st);
      CurvePtr curve(craw);
      char* csv = nullptr;
      if (curve_report->parsed())
        st = unrect_curve_report_csv(con.get(), curve.get(), opt.seed, &csv);
      else
        st = unrect_martingale_report_csv(con.get(), curve.get(), nullptr, 0,
                                          &csv);
      if (st != UNRECT_OK) return fail("reporting on " + path, st);
      std::string name = (curve_report->parsed() ? "curve_report_"
                                                 : "martingale_report_") +
                         std::to_string(idx++) + ".csv";
      rc |= write_output(opt, name, take_string(csv));
    }
    return rc;
  }

  std::cerr << "no subcommand selected\n";
  return 1;
}
