#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "ergolab/foelner.hpp"

namespace ergolab {

// --- exact epsilon-disjointness certification -------------------------------

struct DisjointCertificate {
  bool feasible = false;
  // feasible: one witness E_j per family member, pairwise disjoint,
  // |E_j| >= ceil((1-eps)|F_j|)
  std::vector<FiniteSubset> witnesses;
  // infeasible: a Hall violator - indices J with quota(J) > |union of F_j, j in J|
  std::vector<size_t> deficient_indices;
  Int deficient_union_size = 0, deficient_quota = 0;
};

// Decides exactly (greedy first, big-integer max-flow on the segment
// decomposition as fallback) whether disjoint witnesses meeting the
// per-set quota ceil((1-eps)|F_j|) exist.
DisjointCertificate certify_epsilon_disjoint(const std::vector<FiniteSubset>& family,
                                             const Rat& eps);

// --- disjointification ------------------------------------------------------

struct DisjointifyResult {
  std::vector<std::vector<GroupElement>> selected;  // D_j per scale, canonical order
  std::vector<FiniteSubset> witnesses;              // one per accepted (j, d), scan order
  FiniteSubset union_set;                           // union of F_j D_j over all scales
  bool union_bound_ok = false;                      // |union| >= (eps/5)|C| rechecked exactly
};

// Greedy scan in decreasing scale order, accepting a center iff its translate
// keeps >= (1-eps) of its size outside everything accepted before; both
// conclusions are rechecked exactly and reported, never assumed.
DisjointifyResult epsilon_disjointify(const std::vector<FiniteSubset>& scales,
                                      const std::vector<FiniteSubset>& centers,
                                      const Rat& eps);

// --- effective Vitali covering selection ------------------------------------

struct ScaleAssignment {
  std::vector<GroupElement> centers;        // canonical order, one entry per center
  std::vector<std::vector<size_t>> scales;  // strictly increasing, uniform length q

  size_t q() const { return scales.empty() ? 0 : scales.front().size(); }
  void validate(size_t horizon) const;  // throws on malformed data

  void serialize(std::ostream& os) const;
  static ScaleAssignment deserialize(std::istream& is);
};

enum class CoverOutcome { Expansive, Covering, PostconditionFailed };

struct CoverPair {
  GroupElement center;
  size_t scale = 0;
  FiniteSubset witness;  // E subset of F_scale * center
};

struct CoveringSelection {
  std::vector<CoverPair> pairs;
  Rat eps;
  CoverOutcome outcome = CoverOutcome::PostconditionFailed;
  FiniteSubset union_set;  // union of F_n(d) d over the selection
  Rat coverage;            // |union_set intersect C| / |C|
  // the dichotomy is only guaranteed when q >= 20/eps^2 and the sequence is
  // eps/8-good; running outside that regime is allowed but flagged here
  bool preconditions_ok = true;
  std::string precondition_note;

  void serialize(std::ostream& os) const;
  static CoveringSelection deserialize(std::istream& is, const Group& g);
};

// Descent over scales with masking: at each scale the remaining centers are
// those not blocked by higher-scale picks, and the per-scale selection comes
// from epsilon_disjointify. Dichotomy: either the union is expansive
// (>= 2|C|) or it covers >= (1-eps) of C.
//
// Preconditions enforced: q >= ceil(20/eps^2); the sequence satisfies the
// small-overflow condition at lambda = eps/8 (and, unless
// overflow_condition_only, the translate condition as well).
CoveringSelection vitali_select(const FoelnerSequence& seq, const FiniteSubset& C,
                                const ScaleAssignment& assignment, const Rat& eps,
                                bool overflow_condition_only = false);

// --- growth step ------------------------------------------------------------

// Per-center crossing bookkeeping produced by a dynamical system: scale
// indices n where the ergodic average at the center's orbit point crosses
// above beta (up) or below alpha (down), in increasing order.
struct OrbitData {
  std::vector<GroupElement> centers;
  std::vector<std::vector<size_t>> up_scales;
  std::vector<std::vector<size_t>> down_scales;

  const std::vector<size_t>& up_for(const GroupElement& c) const;
  const std::vector<size_t>& down_for(const GroupElement& c) const;
};

struct GrowthParams {
  Rat alpha, beta;  // gap, 0 < alpha < beta
  Rat bound_s;      // sup-norm bound S, f in [0, S]
  Rat eps, delta;
  size_t q = 0;
  size_t n_k = 0;  // crossing budget already consumed by B_k
};

struct GrowthResult {
  CoveringSelection next;  // B_{k+1}
  Rat growth;              // |union(B_{k+1})| / |union(B_k)|, 0 when B_k empty
};

// One recursion step: from an eps-disjoint collection of upcrossing windows,
// burn q downcrossings and q upcrossings per center to produce the next
// collection whose union grew by (1+delta/2); growth checked exactly.
GrowthResult growth_step(const FoelnerSequence& seq, const OrbitData& orbit,
                         const CoveringSelection& bk, const GrowthParams& p);

// the three constant inequalities gating the growth recursion
bool growth_constants_ok(const Rat& alpha, const Rat& beta, const Rat& bound_s,
                         const Rat& eps, const Rat& delta);

}  // namespace ergolab
