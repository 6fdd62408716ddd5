#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab {

// A run of consecutive integers [lo, hi], inclusive on both ends.
struct Run {
  Int lo, hi;
  Int length() const { return hi - lo + 1; }
  bool operator==(const Run& o) const { return lo == o.lo && hi == o.hi; }
};

// Sorted list of disjoint, non-adjacent runs. This is the only
// representation that survives the block sets of the odometer construction
// (1e7+ elements, ~1e3 runs) and the base-16 power sequences of the covering
// suite (cardinalities far beyond 64 bits).
class IntervalSet {
 public:
  IntervalSet() = default;
  static IntervalSet interval(const Int& lo, const Int& hi);
  static IntervalSet singleton(const Int& v) { return interval(v, v); }
  static IntervalSet from_runs(std::vector<Run> rs);  // sorts and merges
  static IntervalSet from_values(std::vector<Int> vs);

  const std::vector<Run>& runs() const { return runs_; }
  bool empty() const { return runs_.empty(); }
  size_t run_count() const { return runs_.size(); }
  Int cardinality() const;
  const Int& min() const { return runs_.front().lo; }
  const Int& max() const { return runs_.back().hi; }
  bool contains(const Int& v) const;
  // largest number of missing integers between two consecutive runs (0 if <2 runs)
  Int max_internal_gap() const;

  IntervalSet unite(const IntervalSet& o) const;
  IntervalSet intersect(const IntervalSet& o) const;
  IntervalSet difference(const IntervalSet& o) const;
  IntervalSet translate(const Int& d) const;
  IntervalSet negate() const;
  // Minkowski sum {a + b}. Output-sensitive: cost is governed by the run
  // count of the result, not by run_count(a) * run_count(b).
  IntervalSet minkowski_sum(const IntervalSet& o) const;

  // the k smallest elements (all of them when k >= cardinality)
  IntervalSet take_first(const Int& k) const;

  Int intersection_size(const IntervalSet& o) const;
  Int symdiff_size(const IntervalSet& o) const;

  bool operator==(const IntervalSet& o) const { return runs_ == o.runs_; }
  bool operator!=(const IntervalSet& o) const { return runs_ != o.runs_; }

  // enumeration guard: throws if cardinality exceeds limit
  std::vector<Int> elements(size_t limit = 1u << 22) const;

  // "a..b c d..e" text form; parse accepts the same
  std::string to_text() const;
  static IntervalSet parse(const std::string& line);

 private:
  std::vector<Run> runs_;
};

}  // namespace ergolab
