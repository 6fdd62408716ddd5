#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ergolab/group.hpp"

namespace ergolab {

// Indexed family F_1..F_n of finite subsets, eagerly materialized.
class FoelnerSequence {
 public:
  FoelnerSequence() = default;
  FoelnerSequence(Group g, std::vector<FiniteSubset> sets, std::string provenance = "explicit");

  const Group& group() const { return group_; }
  size_t horizon() const { return sets_.size(); }
  // 1-based, matching the usual indexing F_1, F_2, ...
  const FiniteSubset& at(size_t n) const;
  const std::vector<FiniteSubset>& sets() const { return sets_; }
  const std::string& provenance() const { return provenance_; }

  // drops the first (n0-1) sets
  FoelnerSequence tail(size_t n0) const;
  FoelnerSequence subsequence(const std::vector<size_t>& indices) const;

  void serialize(std::ostream& os) const;       // line-oriented, exact round-trip
  static FoelnerSequence deserialize(std::istream& is);

 private:
  Group group_;
  std::vector<FiniteSubset> sets_;
  std::string provenance_;
};

enum class BuiltinKind { Intervals, Boxes, HeisenbergBalls, Powers };

// intervals: F_n=[0,n-1]; powers: F_n=[0,base^n-1]; boxes: [-n,n]^d;
// heisenberg_balls: S^n for S={e,(+-1,0,0),(0,+-1,0)}
FoelnerSequence builtin_sequence(BuiltinKind kind, int horizon, int dim_or_base = 1);

struct TemperednessReport {
  size_t horizon = 0;
  // index n -> |U_{i<n} F_i^{-1} F_n| / |F_n| (resp. right), n >= 2
  std::vector<Rat> left_ratio, right_ratio;
  Rat max_left = 0, max_right = 0;
  // set when identity is not in any prefix set, in which case ratios < 1 are possible
  bool degenerate = false;

  bool bi_tempered(const Rat& c) const { return max_left <= c && max_right <= c; }
};

TemperednessReport tempered_report(const FoelnerSequence& seq, size_t horizon);

struct GoodnessViolation {
  size_t n = 0;
  int condition = 0;                    // 1 or 2
  std::optional<GroupElement> witness;  // condition 2 only
};

struct GoodnessResult {
  bool good = false;
  std::optional<GoodnessViolation> violation;
};

// Two conditions, for all n <= horizon:
//  (1) |U_{i<n} F_i^{-1} F_n \ F_n| <= lambda |F_n|
//  (2) for all i < n and f in F_i:  |F_n \ F_n f| < lambda |F_n|   (strict)
GoodnessResult is_lambda_good(const FoelnerSequence& seq, const Rat& lambda, size_t horizon);

// least n0 such that the tail (F_n)_{n>=n0} is lambda'-good up to horizon
std::optional<size_t> goodness_tail_index(const FoelnerSequence& seq, const Rat& lambda,
                                          const Rat& lambda_prime, size_t horizon);

struct ThinningResult {
  std::vector<size_t> indices;       // selected original indices, increasing
  std::vector<size_t> stage_starts;  // position in `indices` where each schedule stage begins
  bool complete = false;             // false when the horizon ran out mid-stage
};

// Greedy forward selection: for each schedule value c_k (decreasing toward 1),
// extend the selection so that the tail from stage k onward is c_k-bi-tempered,
// rechecked exactly after every acceptance.
ThinningResult thin_strongly_tempered(const FoelnerSequence& seq,
                                      const std::vector<Rat>& c_schedule, size_t horizon,
                                      size_t per_stage = 3);

// max over g in K of |g F_n symdiff F_n| / |F_n|
Rat folner_defect(const FoelnerSequence& seq, const FiniteSubset& K, size_t n);

}  // namespace ergolab
