#pragma once

#include "construction.hpp"
#include "pwaffine.hpp"

#include <string>
#include <vector>

namespace unrect {

// Witness of a chord-slope defect: two segments [x, x+t e] and [y, y+s e]
// through z on which the function's slopes differ by `defect`.
struct ChordWitness {
  RVec z;
  RVec e;         // exact unit direction
  RVec x, y;
  Rat t{0}, s{0};
  Rat defect{0};
  std::string function_id;
  int depth = 0;
};

std::string witness_to_json(const ChordWitness& w);

struct ZetaResult {
  Rat value;
  ChordWitness witness;
};

// Scale-eps non-differentiability meter: spread of chord slopes through z
// along e, with chord endpoint offsets drawn from [-eps, eps]. Exact for
// piecewise-affine arguments.
ZetaResult zeta(const PwAffine& f, const RVec& z, const Rat& eps,
                const RUnit& e);
ZetaResult zeta_h(const Construction& c, const RVec& z, const Rat& eps,
                  const RUnit& e, int depth);
ZetaResult zeta_phi(const Construction& c, int k, const RVec& z,
                    const Rat& eps, const RUnit& e);

// zeta from a precomputed 1-D restriction (nodes must bracket 0)
ZetaResult zeta_from_restriction(const SegPA& g, const RVec& z,
                                 const RUnit& e);

// Certified lower bound for the direction supremum: max of zeta over a
// rational direction grid of the requested size joined with the critical
// set {e_k, e_k perp, w, w perp}.
struct UpsilonResult {
  Rat value;
  RUnit argmax;
  ChordWitness witness;
  int directions_tried = 0;
};
UpsilonResult upsilon_h(const Construction& c, const RVec& z, const Rat& eps,
                        int direction_budget, int depth);
UpsilonResult upsilon(const PwAffine& f, const RVec& z, const Rat& eps,
                      int direction_budget);

// rational unit direction grid used by upsilon (tangent half-angle spaced)
std::vector<RUnit> direction_grid(int budget);

// zeta along a decreasing scale sequence with a consistency verdict.
struct ProbeResult {
  std::vector<Rat> scales;
  std::vector<Rat> values;
  bool derivative_consistent = false;
  Rat limsup_estimate{0};  // max over the scale sequence
};
ProbeResult directional_derivative_probe(const Construction& c, const RVec& z,
                                         const RUnit& e,
                                         const std::vector<Rat>& eps_sequence,
                                         const Rat& tolerance, int depth);

struct WitnessPrecondition : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Explicit defect witness for the stage function: the point u on the stage
// line with z on u + R v, offsets t1 and t2 = 2 t1 reaching the one- and
// two-strip-width boundaries. Verifies rho_k <= t1 <= rho_k/sqrt(eta) and
// returns the exactly evaluated defect (>= sqrt(eta)/2 under a validated
// schedule). Throws WitnessPrecondition naming the violated requirement.
ChordWitness nondiff_witness_phi(const Construction& c, int k, const RVec& z,
                                 RUnit v);

struct HWitness {
  ChordWitness witness;        // defect of h_depth on the lifted chords
  int stage = 0;               // strip index used for the lift
  int m_tilde = 0;             // growth counter at the lift stage
  Rat stage_defect{0};         // defect of the single stage term
  Rat base_defect{0};          // defect of h_{k-1} on the chords (0 when
                               // the partial sum is affine there)
  Rat tail_slack{0};           // beyond-depth slack on these chords
  Rat bound{0};                // 2^-m sqrt(eta)/4 - tail_slack
  bool pass = false;
};
// Lifts the stage witness through h = h_{k-1} + 2^-m sigma phi_k + tail.
HWitness nondiff_witness_h(const Construction& c, const RVec& z, RUnit v,
                           const Rat& eps, int depth);

// Defect surviving any sup-perturbation of size theta on the same chords.
Rat perturbation_stability(const ChordWitness& w, const Rat& theta);

}  // namespace unrect
