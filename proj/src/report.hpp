#pragma once

#include "construction.hpp"
#include "curves.hpp"
#include "martingale.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace unrect {

// RFC 4180 style CSV with a header row; doubles format with %.17g so
// identical runs emit identical bytes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string to_string() const;
};

std::string csv_double(double d);

// Per-point classification and detector sweep over the unit square grid.
std::string nondiff_map_csv(const Construction& c, int grid, int dirs,
                            double eps_floor, std::uint64_t seed, int jobs);

// h values, gradients and tail bounds on a grid.
std::string eval_grid_csv(const Construction& c, int grid, int depth,
                          int jobs);

// One row per (curve, check): crossing bounds against strips and guard
// balls, convex-cell slope integrals, per-component strip integrals, D_p
// measures and the ratio approximation.
std::string curve_report_csv(const Construction& c, const C1Curve& curve,
                             std::uint64_t seed);

// Martingale residuals, alternating-sum norms and the tail inequality at
// the requested thresholds.
std::string martingale_report_csv(const Construction& c, const C1Curve& curve,
                                  const std::vector<double>& lambdas);

// Sampled defect witnesses for one stage, as JSON rows.
std::string witness_report_json(const Construction& c, int stage, int count,
                                std::uint64_t seed, int jobs);

// Schedule/stage statistics: crossing counts, component counts, measured
// Lipschitz constants, audit sizes.
std::string construction_stats_json(const Construction& c);

// Simple order-stable worker pool.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

// deterministic admissible witness sample for stage k: a point in the open
// strip off the guard balls (exact rational), and a direction outside the
// excluded double cone
RVec sample_strip_point(const Construction& c, int k, Rng& rng);
RUnit sample_witness_direction(const Construction& c, Rng& rng);

}  // namespace unrect
