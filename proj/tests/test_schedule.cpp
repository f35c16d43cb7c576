#include "schedule.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <set>

using namespace unrect;
using namespace unrect::testing;

TEST_CASE("classic geometric widths satisfy the summability condition") {
  // 12 * sum_{k>=p} 3^k rho_k <= 4^-p for rho_k = 2^-5 24^-k, checked by
  // direct summation with an analytic tail
  Rat base = pow2(-5);
  Rat ratio(1, 24);
  for (int p = 0; p <= 12; ++p) {
    Rat sum(0);
    for (int k = std::max(p, 1); k <= 40; ++k)
      sum += rat_pow(Rat(3), unsigned(k)) * base * rat_pow(ratio, unsigned(k));
    Rat q = 3 * ratio;
    sum += base * rat_pow(q, 41u) / (1 - q);  // tail beyond the cut
    CHECK(12 * sum <= rat_pow(Rat(1, 4), unsigned(p)));
  }
}

TEST_CASE("rho_k = 3^-k violates summability at p = 1") {
  StripSchedule s = axis_schedule({Rat(1, 2), Rat(3, 5)}, Rat(1, 3));
  s.stages[0].rho = Rat(1, 3);
  s.stages[1].rho = Rat(1, 9);
  recompute_crossings(s);
  Certificate cert = validate_schedule(s);
  CHECK_FALSE(cert.valid);
  bool found = false;
  for (const auto& i : cert.issues)
    if (i.condition == "rho-summability" && i.index == 1) found = true;
  CHECK(found);
}

TEST_CASE("one-stage schedule: crossings empty, theta condition vacuous") {
  StripSchedule s = axis_schedule({Rat(1, 2)}, pow2(-5) / 24);
  CHECK(s.stages[0].crossings.empty());
  Certificate cert = validate_schedule(s);
  for (const auto& i : cert.issues) CHECK(i.condition != "theta");
  CHECK(cert.valid);
}

TEST_CASE("generated schedules validate and have distinct cone directions") {
  StripSchedule s = generate_schedule(Rat(1, 16), 3, 42);
  CHECK(s.depth == 3);
  CHECK(s.cert.valid);
  std::set<std::string> dirs;
  for (const Stage& st : s.stages) {
    CHECK(s.w.dot(st.e) >= 1 - s.eta);
    dirs.insert(rat_str(st.e.v.x) + "/" + rat_str(st.e.v.y));
  }
  CHECK(dirs.size() == 3);
  Certificate again = validate_schedule(s);
  CHECK(again.valid);
}

TEST_CASE("crossing sets populate for later stages") {
  const StripSchedule& s = default_schedule();
  int total = 0;
  for (const Stage& st : s.stages) total += int(st.crossings.size());
  CHECK(total > 0);
  // S_k lies on the stage line
  for (int k = 1; k <= s.depth; ++k) {
    const Stage& st = s.stages[size_t(k - 1)];
    for (const RVec& c : st.crossings) CHECK(st.line().eq.side(c) == 0);
  }
}

TEST_CASE("tail sums follow the geometric rule") {
  const StripSchedule& s = default_schedule();
  REQUIRE(s.rho_rule.has_value());
  // rho_tail(depth) = base * ratio^(depth+1) / (1 - ratio)
  Rat expect = s.rho_rule->first *
               rat_pow(s.rho_rule->second, unsigned(s.depth + 1)) /
               (1 - s.rho_rule->second);
  CHECK(s.rho_tail(s.depth) == expect);
  // and rho_tail(k) counts the explicit stages beyond k
  Rat manual(0);
  for (int j = 3; j <= s.depth; ++j) manual += s.stages[size_t(j - 1)].rho;
  manual += expect;
  CHECK(s.rho_tail(2) == manual);
}

TEST_CASE("JSON round trip preserves every rational") {
  StripSchedule s = generate_schedule(Rat(1, 16), 4, 99);
  std::string text = schedule_to_json(s);
  StripSchedule t = schedule_from_json(text);
  CHECK(t.depth == s.depth);
  CHECK(t.eta == s.eta);
  CHECK(t.eps0 == s.eps0);
  REQUIRE(t.rho_rule.has_value());
  CHECK(t.rho_rule->first == s.rho_rule->first);
  CHECK(t.rho_rule->second == s.rho_rule->second);
  for (int k = 0; k < s.depth; ++k) {
    CHECK(t.stages[size_t(k)].x == s.stages[size_t(k)].x);
    CHECK(t.stages[size_t(k)].e.v == s.stages[size_t(k)].e.v);
    CHECK(t.stages[size_t(k)].rho == s.stages[size_t(k)].rho);
    CHECK(t.stages[size_t(k)].delta == s.stages[size_t(k)].delta);
    CHECK(t.stages[size_t(k)].crossings.size() ==
          s.stages[size_t(k)].crossings.size());
  }
  Certificate cert = validate_schedule(t);
  CHECK(cert.valid);
}

TEST_CASE("loader accepts plain numbers and snaps directions") {
  std::string text = R"({
    "format": "unrect-schedule-v1",
    "w": [1, 0], "eta": 0.0625, "depth": 1, "eps0": 4,
    "stages": [{"x": [0.5, 0.5], "e": [0.9986, 0.0523], "rho": "1/768"}]
  })";
  StripSchedule s = schedule_from_json(text);
  CHECK(s.stages[0].e.v.norm2() == 1);  // snapped onto the circle exactly
  CHECK(s.stages[0].rho == Rat(1, 768));
  CHECK(s.stages[0].delta > 0);  // defaulted
}

TEST_CASE("malformed schedule files raise parse errors") {
  CHECK_THROWS(schedule_from_json("{"));
  CHECK_THROWS(schedule_from_json(R"({"depth": 2, "stages": []})"));
}

TEST_CASE("eta outside the admissible range is rejected") {
  CHECK_THROWS_AS(generate_schedule(Rat(1, 2), 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(generate_schedule(Rat(0), 3, 1), std::invalid_argument);
}

TEST_CASE("infeasible depths report the feasible maximum") {
  CHECK_THROWS_AS(generate_schedule(Rat(1, 16), 150, 1), InfeasibleSchedule);
}

TEST_CASE("theta rule meets both margin inequalities") {
  const StripSchedule& s = default_schedule();
  for (int k = 1; k <= s.depth; ++k) {
    Rat theta = theta_for_stage(s, k);
    Rat A = (1 - theta) / theta;
    // (1-theta)/theta > 2 * 5/sqrt(eta), on squares
    CHECK(A * A * s.eta >= 100);
    // (1-theta)/theta - 5/sqrt(eta) > 2 * 2^{k+1}/(1-eta)
    Rat rem = A - pow2(k + 2) / (1 - s.eta);
    CHECK(rem > 0);
    CHECK(rem * rem * s.eta >= 25);
  }
}

TEST_CASE("determinism: same seed, same schedule") {
  StripSchedule a = generate_schedule(Rat(1, 16), 5, 777);
  StripSchedule b = generate_schedule(Rat(1, 16), 5, 777);
  CHECK(schedule_to_json(a) == schedule_to_json(b));
  StripSchedule c = generate_schedule(Rat(1, 16), 5, 778);
  CHECK(schedule_to_json(a) != schedule_to_json(c));
}
