#include "arrangement.hpp"

#include <doctest.h>

#include <set>

using namespace unrect;

namespace {

// Independent cell-count oracle: enumerate distinct full-dimensional sign
// vectors over a dense grid of rational points.
int sign_vector_count(const std::vector<RLine>& lines, const Window& w,
                      int grid = 160) {
  std::set<std::vector<int>> seen;
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      RVec z(w.x0 + (w.x1 - w.x0) * Rat(2 * i + 1) / Rat(2 * (grid + 1)),
             w.y0 + (w.y1 - w.y0) * Rat(2 * j + 1) / Rat(2 * (grid + 1)));
      std::vector<int> sig;
      bool on_line = false;
      for (const auto& l : lines) {
        int s = l.side(z);
        if (s == 0) on_line = true;
        sig.push_back(s);
      }
      if (!on_line) seen.insert(sig);
    }
  }
  return int(seen.size());
}

}  // namespace

TEST_CASE("empty arrangement is one cell") {
  auto arr = Arrangement::build({});
  CHECK(arr->cells().size() == 1);
  CHECK(std::holds_alternative<int>(arr->locate(RVec(Rat(0), Rat(0)))));
}

TEST_CASE("two crossing lines give four cells") {
  auto arr = Arrangement::build(
      {RLine(Rat(1), Rat(0), Rat(0)), RLine(Rat(0), Rat(1), Rat(0))});
  CHECK(arr->cells().size() == 4);
}

TEST_CASE("three generic lines give seven cells") {
  std::vector<RLine> lines{RLine(Rat(1), Rat(0), Rat(1, 3)),
                           RLine(Rat(0), Rat(1), Rat(1, 5)),
                           RLine(Rat(1), Rat(1), Rat(1))};
  auto arr = Arrangement::build(lines);
  CHECK(arr->cells().size() == 7);
  CHECK(sign_vector_count(lines, arr->window()) == 7);
}

TEST_CASE("cell count respects the arrangement bound") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<RLine> lines;
    int n = 1 + int(rng.below(6));
    for (int i = 0; i < n; ++i) {
      Rat a = 2 * rng.uniform_rat(8) - 1;
      Rat b = 2 * rng.uniform_rat(8) - 1;
      if (a == 0 && b == 0) a = 1;
      lines.emplace_back(a, b, rng.uniform_rat(8));
    }
    auto arr = Arrangement::build(lines);
    size_t m = arr->lines().size();
    CHECK(arr->cells().size() <= 1 + m + m * (m - 1) / 2);
    CHECK(int(arr->cells().size()) ==
          sign_vector_count(arr->lines(), arr->window()));
  }
}

TEST_CASE("locate: interior, on-line and outside") {
  std::vector<RLine> lines{RLine(Rat(1), Rat(0), Rat(0)),
                           RLine(Rat(0), Rat(1), Rat(0))};
  auto arr = Arrangement::build(lines);
  auto loc = arr->locate(RVec(Rat(1), Rat(1)));
  REQUIRE(std::holds_alternative<int>(loc));
  const Cell& cell = arr->cell(std::get<int>(loc));
  CHECK(cell.signs[0] == 1);
  CHECK(cell.signs[1] == 1);

  auto on = arr->locate(RVec(Rat(0), Rat(1, 2)));
  REQUIRE(std::holds_alternative<LocateOnLine>(on));
  CHECK(std::get<LocateOnLine>(on).line_ids == std::vector<int>{0});

  CHECK(std::holds_alternative<LocateOutside>(
      arr->locate(RVec(Rat(100), Rat(0)))));
}

TEST_CASE("locate agrees with sign classification on random points") {
  Rng rng(22);
  std::vector<RLine> lines{RLine(Rat(3), Rat(1), Rat(1)),
                           RLine(Rat(-1), Rat(2), Rat(1, 7)),
                           RLine(Rat(1), Rat(1), Rat(2)),
                           RLine(Rat(0), Rat(1), Rat(1, 2))};
  auto arr = Arrangement::build(lines);
  for (int i = 0; i < 10000; ++i) {
    RVec z(5 * rng.uniform_rat(20) - 2, 5 * rng.uniform_rat(20) - 2);
    auto loc = arr->locate(z);
    if (std::holds_alternative<LocateOnLine>(loc)) continue;
    REQUIRE(std::holds_alternative<int>(loc));
    const Cell& cell = arr->cell(std::get<int>(loc));
    for (size_t li = 0; li < lines.size(); ++li)
      CHECK(int(cell.signs[li]) == arr->lines()[li].side(z));
  }
}

TEST_CASE("locate is constant along segments that cross no line") {
  Rng rng(23);
  std::vector<RLine> lines{RLine(Rat(2), Rat(1), Rat(1)),
                           RLine(Rat(-1), Rat(3), Rat(1, 3)),
                           RLine(Rat(1), Rat(4), Rat(2))};
  auto arr = Arrangement::build(lines);
  int tested = 0;
  for (int trial = 0; trial < 500 && tested < 100; ++trial) {
    RVec a(4 * rng.uniform_rat(16) - 1, 4 * rng.uniform_rat(16) - 1);
    RVec b(4 * rng.uniform_rat(16) - 1, 4 * rng.uniform_rat(16) - 1);
    // segment-line intersection oracle: the segment misses every line iff
    // the endpoints are strictly on the same side of each
    bool crosses = false;
    for (const auto& l : lines) {
      int sa = l.side(a), sb = l.side(b);
      if (sa == 0 || sb == 0 || sa != sb) {
        crosses = true;
        break;
      }
    }
    if (crosses) continue;
    ++tested;
    auto la = arr->locate(a), lb = arr->locate(b);
    auto lm = arr->locate(a + (b - a) * Rat(1, 2));
    REQUIRE(std::holds_alternative<int>(la));
    CHECK(std::get<int>(la) == std::get<int>(lb));
    CHECK(std::get<int>(la) == std::get<int>(lm));
  }
  CHECK(tested >= 50);
}

TEST_CASE("adjacency records opposite cells of shared segments") {
  std::vector<RLine> lines{RLine(Rat(1), Rat(0), Rat(0)),
                           RLine(Rat(0), Rat(1), Rat(0))};
  auto arr = Arrangement::build(lines);
  CHECK(arr->adjacency().size() == 4);
  for (const auto& adj : arr->adjacency()) {
    const RLine& l = arr->lines()[size_t(adj.line_id)];
    CHECK(l.side(adj.p) == 0);
    CHECK(l.side(adj.q) == 0);
    const Cell& a = arr->cell(adj.cell_a);
    const Cell& b = arr->cell(adj.cell_b);
    CHECK(int(a.signs[size_t(adj.line_id)]) !=
          int(b.signs[size_t(adj.line_id)]));
  }
}

TEST_CASE("line cap reports the offending count") {
  std::vector<RLine> lines;
  for (int i = 1; i <= 12; ++i)
    lines.emplace_back(Rat(1), Rat(i), Rat(1, i));
  CHECK_THROWS_AS(Arrangement::build(lines, Window(), 8), LineCapExceeded);
}

TEST_CASE("duplicate lines are removed") {
  auto arr = Arrangement::build({RLine(Rat(1), Rat(0), Rat(0)),
                                 RLine(Rat(2), Rat(0), Rat(0)),
                                 RLine(Rat(-3), Rat(0), Rat(0))});
  CHECK(arr->lines().size() == 1);
  CHECK(arr->cells().size() == 2);
}
