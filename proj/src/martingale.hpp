#pragma once

#include "curves.hpp"

#include <functional>
#include <string>
#include <vector>

namespace unrect {

// Per-atom values of a process at every filtration level.
struct ProcessSample {
  // level p -> value per atom of f.levels[p]
  std::vector<std::vector<double>> values;
};

// Tangent-weighted probability measure mu^v(A) = int_A <gamma',v> / total.
// Requires <gamma'(t), v> >= c > 0 (checked on a grid, error names the
// offending parameter). K(gamma) is the unnormalized total.
struct MuV {
  Vec2 v;
  double total = 0;                  // K(gamma) = int_I <gamma', v>
  std::vector<double> interval_mass; // per finest interval, normalized
  double c_min = 0;                  // grid minimum of <gamma', v>
};
MuV build_mu_v(const C1Curve& c, const Filtration& f, const UnitVec& v,
               int grid = 2048);

double mu_v_mass(const MuV& mu, const Filtration& f,
                 const std::vector<int>& intervals);

// E[X | level-p partition] under `measure` ("lebesgue" weights when mu is
// null): per-atom value = weighted mean. Zero-mass atoms are dropped with a
// warning flag on the output.
struct CondExpResult {
  std::vector<double> atom_values;
  int dropped_atoms = 0;
};
CondExpResult conditional_expectation(
    const std::function<double(double)>& X, const Filtration& f, int level,
    const MuV* mu, int points_per_interval = 8);

// The direction-ratio process of the conditioned tangent:
// X_p = <beta_p, v_perp>/<beta_p, v>, constant per atom.
ProcessSample ratio_process(const Filtration& f, const UnitVec& v);

// max over levels and atoms of |E[X_{p+1}|Sigma_p] - X_p| under mu.
double martingale_residual(const ProcessSample& X, const Filtration& f,
                           const MuV& mu);

struct AltSumReport {
  double max_martingale_residual = 0;  // of the alternating sums
  double max_l2 = 0;                   // max_N ||sum (-1)^n X_n||_L2
  double sup_level_l2 = 0;             // sup_n ||X_n||_L2
  bool l2_ok = false;                  // max_l2 <= 2 sup
  bool submartingale_ok = false;       // int X_{2n-1}^2 <= int X_{2n}^2
};
AltSumReport alternating_sum_check(const ProcessSample& X, const Filtration& f,
                                   const MuV& mu);

struct DoobReport {
  double lambda = 0;
  double exceedance = 0;      // Lebesgue measure of {sup_p |alpha_p| > lambda}
  double bound = 0;           // 16 K(gamma) / (lambda^2 c^3)
  double mu_bound = 0;        // intermediate 16/c^2 step (mu^v measure bound)
  double mu_exceedance = 0;
  bool pass = false;
};
// Running alternating sums alpha_p = sum_{q<2p} (-1)^q X_q of the ratio
// process; tail bound via the recorded normalization K(gamma).
DoobReport doob_tail_check(const C1Curve& c, const Filtration& f,
                           const UnitVec& v, double lambda, const MuV& mu);

// Blockwise alternating sums of the strip-direction ratios between growth
// stages of the counter at z, with the certified lower bound 2^n eps(n) - 2.
struct DerGrowBlock {
  int n = 0;             // growth index
  int r_from = 0, r_to = 0;
  Rat block_sum;         // sum over stages in the block (exact)
  Rat lower_bound;       // 2^n eps(n) - 2
  bool chain_certified = false;  // gradient bookkeeping confirms the chain
};
std::vector<DerGrowBlock> der_grow_diagnostic(const Construction& con,
                                              const RVec& z, int depth);

}  // namespace unrect
