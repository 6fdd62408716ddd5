#include "ergolab/group.hpp"

#include <algorithm>

namespace ergolab {

std::string Group::name() const {
  switch (kind) {
    case GroupKind::Integers: return "Z";
    case GroupKind::IntegerVector: return "Z^" + std::to_string(dim);
    case GroupKind::Heisenberg: return "H3";
  }
  return "?";
}

std::string element_text(const GroupElement& e) {
  if (e.c.size() == 1) return e.c[0].str();
  std::string s = "(";
  for (size_t i = 0; i < e.c.size(); ++i) {
    if (i) s += ",";
    s += e.c[i].str();
  }
  return s + ")";
}

GroupElement parse_element_text(const std::string& tok) {
  if (tok.empty() || tok[0] != '(') return GroupElement::z(Int(tok));
  GroupElement e;
  std::string cur;
  for (size_t i = 1; i + 1 < tok.size(); ++i) {
    if (tok[i] == ',') {
      e.c.push_back(Int(cur));
      cur.clear();
    } else {
      cur += tok[i];
    }
  }
  e.c.push_back(Int(cur));
  return e;
}

GroupElement identity(const Group& g) {
  return {std::vector<Int>(g.coords(), Int(0))};
}

GroupElement multiply(const Group& g, const GroupElement& a, const GroupElement& b) {
  const int n = g.coords();
  if ((int)a.c.size() != n || (int)b.c.size() != n)
    throw std::invalid_argument("element arity mismatch");
  GroupElement r;
  r.c.resize(n);
  for (int i = 0; i < n; ++i) r.c[i] = a.c[i] + b.c[i];
  if (g.kind == GroupKind::Heisenberg) r.c[2] += a.c[0] * b.c[1];
  return r;
}

GroupElement inverse(const Group& g, const GroupElement& a) {
  GroupElement r;
  r.c.reserve(a.c.size());
  for (auto& v : a.c) r.c.push_back(-v);
  if (g.kind == GroupKind::Heisenberg) r.c[2] = a.c[0] * a.c[1] - a.c[2];
  return r;
}

FiniteSubset FiniteSubset::from_elements(Group g, std::vector<GroupElement> es) {
  std::sort(es.begin(), es.end());
  es.erase(std::unique(es.begin(), es.end()), es.end());
  FiniteSubset s;
  s.group_ = g;
  if (g.kind == GroupKind::Integers) {
    std::vector<Int> vs;
    vs.reserve(es.size());
    for (auto& e : es) vs.push_back(e.c.at(0));
    s.runs_ = IntervalSet::from_values(std::move(vs));
  }
  s.elems_ = std::move(es);
  return s;
}

FiniteSubset FiniteSubset::from_intervals(IntervalSet is) {
  FiniteSubset s;
  s.group_ = Group::integers();
  s.runs_ = std::move(is);
  return s;
}

const IntervalSet& FiniteSubset::runs() const {
  if (!runs_) throw std::runtime_error("no run-list form for this subset");
  return *runs_;
}

const std::vector<GroupElement>& FiniteSubset::elements() const {
  if (!elems_) {
    std::vector<GroupElement> es;
    for (auto& v : runs().elements()) es.push_back(GroupElement::z(v));
    elems_ = std::move(es);
  }
  return *elems_;
}

Int FiniteSubset::cardinality() const {
  if (runs_) return runs_->cardinality();
  return elems_ ? Int(elems_->size()) : Int(0);
}

bool FiniteSubset::contains(const GroupElement& e) const {
  if (runs_) return runs_->contains(e.c.at(0));
  if (!elems_) return false;
  return std::binary_search(elems_->begin(), elems_->end(), e);
}

namespace {
void require_same_group(const FiniteSubset& a, const FiniteSubset& b) {
  if (!(a.group() == b.group()))
    throw std::invalid_argument("group mismatch: " + a.group().name() + " vs " + b.group().name());
}
}  // namespace

FiniteSubset FiniteSubset::unite(const FiniteSubset& o) const {
  require_same_group(*this, o);
  if (runs_ && o.runs_) return from_intervals(runs_->unite(*o.runs_));
  auto es = elements();
  auto& oe = o.elements();
  es.insert(es.end(), oe.begin(), oe.end());
  return from_elements(group_, std::move(es));
}

FiniteSubset FiniteSubset::intersect(const FiniteSubset& o) const {
  require_same_group(*this, o);
  if (runs_ && o.runs_) return from_intervals(runs_->intersect(*o.runs_));
  std::vector<GroupElement> out;
  std::set_intersection(elements().begin(), elements().end(),
                        o.elements().begin(), o.elements().end(),
                        std::back_inserter(out));
  return from_elements(group_, std::move(out));
}

FiniteSubset FiniteSubset::difference(const FiniteSubset& o) const {
  require_same_group(*this, o);
  if (runs_ && o.runs_) return from_intervals(runs_->difference(*o.runs_));
  std::vector<GroupElement> out;
  std::set_difference(elements().begin(), elements().end(),
                      o.elements().begin(), o.elements().end(),
                      std::back_inserter(out));
  return from_elements(group_, std::move(out));
}

Int FiniteSubset::intersection_size(const FiniteSubset& o) const {
  require_same_group(*this, o);
  if (runs_ && o.runs_) return runs_->intersection_size(*o.runs_);
  return intersect(o).cardinality();
}

Int FiniteSubset::symdiff_size(const FiniteSubset& o) const {
  return cardinality() + o.cardinality() - 2 * intersection_size(o);
}

bool FiniteSubset::operator==(const FiniteSubset& o) const {
  if (!(group_ == o.group_)) return false;
  if (runs_ && o.runs_) return *runs_ == *o.runs_;
  return elements() == o.elements();
}

FiniteSubset set_product(const FiniteSubset& a, const FiniteSubset& b) {
  require_same_group(a, b);
  if (a.has_runs() && b.has_runs())
    return FiniteSubset::from_intervals(a.runs().minkowski_sum(b.runs()));
  std::vector<GroupElement> out;
  const auto& g = a.group();
  for (auto& x : a.elements())
    for (auto& y : b.elements()) out.push_back(multiply(g, x, y));
  return FiniteSubset::from_elements(g, std::move(out));
}

FiniteSubset set_inverse(const FiniteSubset& a) {
  if (a.has_runs()) return FiniteSubset::from_intervals(a.runs().negate());
  std::vector<GroupElement> out;
  out.reserve(a.elements().size());
  for (auto& x : a.elements()) out.push_back(inverse(a.group(), x));
  return FiniteSubset::from_elements(a.group(), std::move(out));
}

FiniteSubset translate(const FiniteSubset& a, const GroupElement& g, Side side) {
  if (a.has_runs()) return FiniteSubset::from_intervals(a.runs().translate(g.c.at(0)));
  std::vector<GroupElement> out;
  out.reserve(a.elements().size());
  for (auto& x : a.elements())
    out.push_back(side == Side::Right ? multiply(a.group(), x, g)
                                      : multiply(a.group(), g, x));
  return FiniteSubset::from_elements(a.group(), std::move(out));
}

Rat symdiff_ratio(const FiniteSubset& a, const FiniteSubset& b) {
  Int na = a.cardinality();
  if (na == 0) throw std::invalid_argument("symdiff_ratio: empty reference set");
  return Rat(a.symdiff_size(b), na);
}

}  // namespace ergolab
