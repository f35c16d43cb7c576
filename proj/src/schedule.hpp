#pragma once

#include "arrangement.hpp"
#include "geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace unrect {

// One stage of the strip schedule: the line, its strip half-width, the
// guard-ball radius, and the recorded crossings with the boundary lines of
// all earlier stages (within the arrangement window).
struct Stage {
  RVec x;            // base point on the line
  RUnit e;           // direction, inside the cone around w
  Rat rho;           // strip half-width
  Rat delta;         // guard-ball radius around each crossing
  std::vector<RVec> crossings;  // S_k = L_k intersect T_{k-1}, windowed

  Line line() const { return Line(x, e); }
  Strip strip() const { return Strip(line(), rho); }
};

struct ValidationIssue {
  std::string condition;  // identifier of the violated inequality
  int index;              // offending stage / tail index
  double lhs, rhs;
  std::string detail;
};

struct Certificate {
  bool valid = false;
  int depth = 0;
  std::vector<ValidationIssue> issues;        // empty when valid
  std::vector<std::string> checked;           // condition ids that ran
};

// Generator data for the staged construction: the cone axis w, cone width
// eta, K stages, the epsilon(0) constant of the gradient-growth rule, and
// an optional geometric tail rule for the widths beyond depth K.
struct StripSchedule {
  RUnit w;
  Rat eta;
  int depth = 0;
  std::vector<Stage> stages;  // stages[0] is stage 1
  Rat eps0 = Rat(4);
  // rho_k = rho_base * rho_ratio^k for k > depth (tail sums); empty when
  // the schedule was hand-built without a decay rule.
  std::optional<std::pair<Rat, Rat>> rho_rule;
  Window window;
  Certificate cert;

  // epsilon(n) of the growth rule: eps0 for n = 0, 1/n^2 otherwise
  Rat eps(int n) const {
    if (n <= 0) return eps0;
    return Rat(1) / Rat(long(n) * long(n));
  }
  // boundary lines of stages 1..k (the cumulative line family T_k)
  std::vector<RLine> boundary_lines(int k) const;
  // exact tail sum of rho_j over j in (from, infinity) under the rule,
  // or over (from, depth] when no rule is present
  Rat rho_tail(int from) const;
};

struct InfeasibleSchedule : std::runtime_error {
  int max_feasible;
  InfeasibleSchedule(const std::string& what, int maxk)
      : std::runtime_error(what), max_feasible(maxk) {}
};

// Deterministically generates a validated K-stage schedule. Directions live
// on an eta-cone-constrained rational grid that fills out as K grows; base
// points are steered so each new line crosses an earlier boundary line
// inside the unit square. Throws InfeasibleSchedule when K stages cannot be
// realized (direction grid exhausted or float mirror underflow).
StripSchedule generate_schedule(const Rat& eta, int depth, std::uint64_t seed,
                                Window window = Window());

// Checks every inequality the construction relies on; returns a certificate
// (valid or the violation list). The schedule's crossing sets must be
// populated (generate_schedule and the JSON loader both do this).
Certificate validate_schedule(const StripSchedule& s);

// Recompute crossings S_k from the stage lines (used after loading).
void recompute_crossings(StripSchedule& s);

// theta_k of the validator: the largest dyadic 2^-j satisfying the margin
// conditions used by condition (ii).
Rat theta_for_stage(const StripSchedule& s, int k);

// JSON round trip. Rationals serialize as "p/q" strings; plain JSON
// numbers are accepted on input and converted exactly.
std::string schedule_to_json(const StripSchedule& s, bool include_cert = true);
StripSchedule schedule_from_json(const std::string& text);
StripSchedule schedule_load(const std::string& path);
void schedule_save(const StripSchedule& s, const std::string& path);

}  // namespace unrect
