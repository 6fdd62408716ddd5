#pragma once

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/interval_set.hpp"
#include "ergolab/rational.hpp"

namespace ergolab {

// Supported groups: Z, Z^d, and the discrete Heisenberg group H3(Z) with
// (a,b,c)*(a',b',c') = (a+a', b+b', c+c'+a*b').
enum class GroupKind { Integers, IntegerVector, Heisenberg };

struct Group {
  GroupKind kind = GroupKind::Integers;
  int dim = 1;  // IntegerVector only

  static Group integers() { return {GroupKind::Integers, 1}; }
  static Group integer_vector(int d) { return {GroupKind::IntegerVector, d}; }
  static Group heisenberg() { return {GroupKind::Heisenberg, 3}; }

  int coords() const {
    switch (kind) {
      case GroupKind::Integers: return 1;
      case GroupKind::IntegerVector: return dim;
      case GroupKind::Heisenberg: return 3;
    }
    return 1;
  }
  bool operator==(const Group& o) const { return kind == o.kind && coords() == o.coords(); }
  std::string name() const;
};

struct GroupElement {
  std::vector<Int> c;

  static GroupElement z(Int v) { return {{std::move(v)}}; }
  auto operator<=>(const GroupElement& o) const = default;  // lexicographic
};

// "v" for rank-1 elements, "(a,b,c)" otherwise; exact round-trip
std::string element_text(const GroupElement& e);
GroupElement parse_element_text(const std::string& tok);

GroupElement identity(const Group& g);
GroupElement multiply(const Group& g, const GroupElement& a, const GroupElement& b);
GroupElement inverse(const Group& g, const GroupElement& a);

// A finite subset of a group, canonically ordered and deduplicated.
// For Z there is a second, exact run-list form; operations dispatch to it
// whenever both arguments carry it (required for the large block sets).
class FiniteSubset {
 public:
  FiniteSubset() = default;
  static FiniteSubset from_elements(Group g, std::vector<GroupElement> es);
  static FiniteSubset from_intervals(IntervalSet s);  // group Z
  static FiniteSubset z_interval(const Int& lo, const Int& hi) {
    return from_intervals(IntervalSet::interval(lo, hi));
  }

  const Group& group() const { return group_; }
  bool has_runs() const { return runs_.has_value(); }
  const IntervalSet& runs() const;
  // sorted element list; materialized on demand for Z (guarded by size)
  const std::vector<GroupElement>& elements() const;

  Int cardinality() const;
  bool empty() const { return cardinality() == 0; }
  bool contains(const GroupElement& e) const;

  FiniteSubset unite(const FiniteSubset& o) const;
  FiniteSubset intersect(const FiniteSubset& o) const;
  FiniteSubset difference(const FiniteSubset& o) const;
  Int intersection_size(const FiniteSubset& o) const;
  Int symdiff_size(const FiniteSubset& o) const;
  bool operator==(const FiniteSubset& o) const;

 private:
  Group group_;
  std::optional<IntervalSet> runs_;
  mutable std::optional<std::vector<GroupElement>> elems_;
};

enum class Side { Left, Right };

// {a*b : a in A, b in B}
FiniteSubset set_product(const FiniteSubset& a, const FiniteSubset& b);
// {a^{-1}}
FiniteSubset set_inverse(const FiniteSubset& a);
// {a*g} (Right) or {g*a} (Left)
FiniteSubset translate(const FiniteSubset& a, const GroupElement& g, Side side);
// |A symdiff B| / |A|
Rat symdiff_ratio(const FiniteSubset& a, const FiniteSubset& b);

}  // namespace ergolab
