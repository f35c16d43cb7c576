#pragma once

#include "pwaffine.hpp"
#include "schedule.hpp"

#include <vector>

namespace unrect {

// Staged construction over a validated schedule. Stage functions, signs,
// growth counters and partial sums are evaluated exactly at rational points
// and along rational segments; explicit piecewise-affine objects are built
// on demand for local audits.
class Construction {
 public:
  Construction(StripSchedule sched, int depth);

  const StripSchedule& schedule() const { return sched_; }
  int depth() const { return depth_; }

  // Full trajectory of the construction at a point.
  struct PointState {
    RVec z;
    std::vector<int> k_list;   // strip indices containing z, increasing
    std::vector<int> sigma;    // sigma_0..sigma_depth
    std::vector<int> m;        // m_0..m_depth
    std::vector<Rat> phi;      // phi_1..phi_depth (index 0 = stage 1)
    std::vector<RVec> dphi;
    std::vector<Rat> h;        // h_0..h_depth
    std::vector<RVec> dh;
    // 0 when every gradient below `depth` exists at z; otherwise the first
    // stage whose gradient is undefined here (z on a kink of that stage)
    int first_kink = 0;

    bool gradients_valid(int k) const {
      return first_kink == 0 || k < first_kink;
    }
    int j_last(int k) const {  // last growth stage strictly before k
      for (int j = k - 1; j >= 1; --j)
        if (m[size_t(j)] != m[size_t(j - 1)]) return j;
      return 0;
    }
    std::vector<int> growth_stages() const {
      std::vector<int> r;
      for (size_t j = 1; j < m.size(); ++j)
        if (m[j] != m[j - 1]) r.push_back(int(j));
      return r;
    }
  };

  PointState evaluate(const RVec& z, int depth) const;
  PointState evaluate(const RVec& z) const { return evaluate(z, depth_); }

  Rat h_value(const RVec& z, int depth) const;
  // throws OnLineGradient when z lies on a kink of some stage <= depth
  RVec h_gradient(const RVec& z, int depth) const;
  // sum_{j>depth} 2 rho_j / (1-eta)
  Rat h_tail_bound(int depth) const;

  // stage function phi_k and the capped ramp phi~_k, pointwise
  Rat phi_value(int k, const RVec& z) const;
  RVec phi_gradient(int k, const RVec& z) const;  // throws OnLineGradient
  Rat phi_tilde_value(int k, const RVec& z) const;
  const RVec& ramp_gradient(int k) const { return pre_[size_t(k - 1)].ramp_grad; }
  const Rat& phi_top(int k) const { return pre_[size_t(k - 1)].top; }
  // scaled near-distance term min over T_{k-1}; +infinity for k = 1
  // (returned as nullopt)
  std::optional<Rat> dist_term(int k, const RVec& z) const;

  // exact piecewise-affine restriction of h_depth / phi_k to a segment
  SegPA restrict_h(const RVec& z, const RVec& dir, const Rat& lo,
                   const Rat& hi, int depth) const;
  SegPA restrict_phi(int k, const RVec& z, const RVec& dir, const Rat& lo,
                     const Rat& hi) const;

  bool in_strip(int k, const RVec& z) const;
  bool in_guard_ball(int k, const RVec& z) const;
  Rat strip_offset(int k, const RVec& z) const;

  // finite-depth classification proxies over the tail window
  // [ceil(depth/2), depth]; all flags are depth-K stand-ins for the limit
  // sets and are labeled as proxies in every report.
  struct Classification {
    bool in_E_proxy = false;
    bool in_G_proxy = false;
    int m_depth = 0;
    bool H_candidate_proxy = false;
    std::vector<int> k_list;
    bool F_class(int m) const { return !in_G_proxy && m_depth <= m; }
  };
  Classification classify(const RVec& z, int growth_threshold = 2) const;

  // Explicit exact piecewise-affine model of phi_k over a window hugging
  // the strip (audits of per-cell affinity, continuity and the gradient
  // bounds run on this object).
  struct StageAudit {
    int k = 0;
    Window window;
    PwAffine phi;
  };
  StageAudit audit_stage(int k, int line_cap = Arrangement::kDefaultLineCap) const;

  // cells of strip_k minus earlier boundary lines, inside the audit window
  int strip_component_count(int k) const;

  // sup of ||Dh_depth|| over a deterministic sample cloud (grid points of
  // the unit square plus in-strip samples for every stage)
  double measured_lipschitz(int depth, int grid, std::uint64_t seed) const;

  // audit window around stage k's strip, clipped near the unit square
  Window stage_window(int k) const;

  const RVec& w() const { return sched_.w.v; }
  const RVec& wperp() const { return wperp_; }

 private:
  struct StagePre {
    RVec eperp;     // e_k rotated +90
    Rat off_base;   // <x_k, eperp>
    Rat we;         // <w, e_k>
    Rat top;        // 2 rho_k / <w, e_k>
    AffinePiece ramp;
    RVec ramp_grad;
    Rat scale;      // 2^-k
  };
  struct WedgeLine {
    RLine line;
    Rat r;      // exact norm of the integer normal (boundary normals are
                // Pythagorean by construction)
    int stage;  // stage whose strip boundary this is
  };

  StripSchedule sched_;
  int depth_;
  RVec wperp_;
  std::vector<StagePre> pre_;      // per stage
  std::vector<WedgeLine> wedges_;  // cumulative; stage k uses entries with
                                   // .stage < k (they are ordered by stage)

  friend class SegmentScanner;
};

}  // namespace unrect
