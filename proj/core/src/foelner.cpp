#include "ergolab/foelner.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace ergolab {

FoelnerSequence::FoelnerSequence(Group g, std::vector<FiniteSubset> sets, std::string provenance)
    : group_(g), sets_(std::move(sets)), provenance_(std::move(provenance)) {
  for (auto& s : sets_) {
    if (!(s.group() == group_)) throw std::invalid_argument("sequence group mismatch");
    if (s.empty()) throw std::invalid_argument("empty set in Foelner sequence");
  }
}

const FiniteSubset& FoelnerSequence::at(size_t n) const {
  if (n < 1 || n > sets_.size()) throw std::out_of_range("Foelner index");
  return sets_[n - 1];
}

FoelnerSequence FoelnerSequence::tail(size_t n0) const {
  if (n0 < 1 || n0 > sets_.size()) throw std::out_of_range("tail index");
  return FoelnerSequence(group_, {sets_.begin() + (n0 - 1), sets_.end()},
                         provenance_ + "|tail:" + std::to_string(n0));
}

FoelnerSequence FoelnerSequence::subsequence(const std::vector<size_t>& indices) const {
  std::vector<FiniteSubset> out;
  out.reserve(indices.size());
  for (size_t i : indices) out.push_back(at(i));
  return FoelnerSequence(group_, std::move(out), provenance_ + "|subseq");
}

FoelnerSequence builtin_sequence(BuiltinKind kind, int horizon, int dim_or_base) {
  if (horizon < 1) throw std::invalid_argument("horizon >= 1 required");
  std::vector<FiniteSubset> sets;
  switch (kind) {
    case BuiltinKind::Intervals: {
      for (int n = 1; n <= horizon; ++n) sets.push_back(FiniteSubset::z_interval(0, n - 1));
      return FoelnerSequence(Group::integers(), std::move(sets), "intervals");
    }
    case BuiltinKind::Powers: {
      if (dim_or_base < 2) throw std::invalid_argument("powers base >= 2 required");
      Int p = 1;
      for (int n = 1; n <= horizon; ++n) {
        p *= dim_or_base;
        sets.push_back(FiniteSubset::z_interval(0, p - 1));
      }
      return FoelnerSequence(Group::integers(), std::move(sets),
                             "powers:" + std::to_string(dim_or_base));
    }
    case BuiltinKind::Boxes: {
      int d = dim_or_base;
      if (d < 1) throw std::invalid_argument("boxes dimension >= 1 required");
      if (d == 1) {
        for (int n = 1; n <= horizon; ++n) sets.push_back(FiniteSubset::z_interval(-n, n));
        return FoelnerSequence(Group::integers(), std::move(sets), "boxes:1");
      }
      Group g = Group::integer_vector(d);
      for (int n = 1; n <= horizon; ++n) {
        std::vector<GroupElement> es;
        std::vector<Int> cur(d, Int(-n));
        for (;;) {
          es.push_back({cur});
          int i = 0;
          while (i < d && cur[i] == n) { cur[i] = -n; ++i; }
          if (i == d) break;
          ++cur[i];
        }
        sets.push_back(FiniteSubset::from_elements(g, std::move(es)));
      }
      return FoelnerSequence(g, std::move(sets), "boxes:" + std::to_string(d));
    }
    case BuiltinKind::HeisenbergBalls: {
      Group g = Group::heisenberg();
      std::vector<GroupElement> gens = {identity(g),
                                        {{1, 0, 0}}, {{-1, 0, 0}},
                                        {{0, 1, 0}}, {{0, -1, 0}}};
      FiniteSubset s = FiniteSubset::from_elements(g, gens);
      FiniteSubset ball = s;
      for (int n = 1; n <= horizon; ++n) {
        if (n > 1) ball = set_product(ball, s);
        sets.push_back(ball);
      }
      return FoelnerSequence(g, std::move(sets), "heisenberg_balls");
    }
  }
  throw std::invalid_argument("unknown builtin kind");
}

TemperednessReport tempered_report(const FoelnerSequence& seq, size_t horizon) {
  if (horizon > seq.horizon()) throw std::out_of_range("horizon beyond sequence");
  TemperednessReport rep;
  rep.horizon = horizon;
  if (horizon < 1) return rep;
  const GroupElement e = identity(seq.group());
  FiniteSubset prefix = seq.at(1);
  bool has_identity = prefix.contains(e);
  for (size_t n = 2; n <= horizon; ++n) {
    const FiniteSubset& fn = seq.at(n);
    FiniteSubset inv = set_inverse(prefix);
    Rat left(set_product(inv, fn).cardinality(), fn.cardinality());
    Rat right(set_product(fn, inv).cardinality(), fn.cardinality());
    rep.left_ratio.push_back(left);
    rep.right_ratio.push_back(right);
    rep.max_left = std::max(rep.max_left, left);
    rep.max_right = std::max(rep.max_right, right);
    if (!has_identity) rep.degenerate = true;
    prefix = prefix.unite(fn);
    has_identity = has_identity || fn.contains(e);
  }
  return rep;
}

namespace {

// |F_n \ F_n f| for a single translate f; Z fast path via runs
Int right_translate_defect(const FiniteSubset& fn, const GroupElement& f) {
  FiniteSubset shifted = translate(fn, f, Side::Right);
  return fn.cardinality() - fn.intersection_size(shifted);
}

}  // namespace

GoodnessResult is_lambda_good(const FoelnerSequence& seq, const Rat& lambda, size_t horizon) {
  if (!(lambda > 0 && lambda < 1)) throw std::invalid_argument("lambda in (0,1) required");
  if (horizon > seq.horizon()) throw std::out_of_range("horizon beyond sequence");
  const bool is_z = seq.group().kind == GroupKind::Integers;
  FiniteSubset prefix;  // union of F_i, i < n
  for (size_t n = 1; n <= horizon; ++n) {
    const FiniteSubset& fn = seq.at(n);
    const Int card = fn.cardinality();
    if (n >= 2) {
      // (1) small product-set overflow
      FiniteSubset prod = set_product(set_inverse(prefix), fn);
      Int overflow = prod.cardinality() - prod.intersection_size(fn);
      if (Rat(overflow, card) > lambda)
        return {false, GoodnessViolation{n, 1, std::nullopt}};
      // (2) small right-translate defect, f ranging over the prefix union
      if (is_z && fn.runs().run_count() == 1) {
        // defect of an interval under translation by f is min(|f|, |F_n|),
        // monotone in |f|; the extreme f decides
        Int worst = std::max(Int(abs(prefix.runs().min())), Int(abs(prefix.runs().max())));
        Int defect = std::min(worst, card);
        if (!(Rat(defect, card) < lambda)) {
          Int f = abs(prefix.runs().min()) >= abs(prefix.runs().max())
                      ? prefix.runs().min() : prefix.runs().max();
          return {false, GoodnessViolation{n, 2, GroupElement::z(f)}};
        }
      } else {
        for (const auto& f : prefix.elements()) {
          Int defect = right_translate_defect(fn, f);
          if (!(Rat(defect, card) < lambda))
            return {false, GoodnessViolation{n, 2, f}};
        }
      }
    }
    prefix = n == 1 ? fn : prefix.unite(fn);
  }
  return {true, std::nullopt};
}

std::optional<size_t> goodness_tail_index(const FoelnerSequence& seq, const Rat& lambda,
                                          const Rat& lambda_prime, size_t horizon) {
  if (!(lambda > 0 && lambda < lambda_prime && lambda_prime < 1))
    throw std::invalid_argument("need 0 < lambda < lambda' < 1");
  TemperednessReport rep = tempered_report(seq, horizon);
  if (!rep.bi_tempered(Rat(1) + lambda))
    throw std::invalid_argument("sequence is not (1+lambda)-bi-tempered up to horizon");
  for (size_t n0 = 1; n0 <= horizon; ++n0) {
    if (is_lambda_good(seq.tail(n0), lambda_prime, horizon - n0 + 1).good) return n0;
  }
  return std::nullopt;
}

ThinningResult thin_strongly_tempered(const FoelnerSequence& seq,
                                      const std::vector<Rat>& c_schedule, size_t horizon,
                                      size_t per_stage) {
  for (size_t k = 0; k < c_schedule.size(); ++k) {
    if (!(c_schedule[k] > 1)) throw std::invalid_argument("schedule values must exceed 1");
    if (k > 0 && !(c_schedule[k] < c_schedule[k - 1]))
      throw std::invalid_argument("schedule must be strictly decreasing");
  }
  ThinningResult res;
  // per-stage running unions of the selected tail-from-stage-k sets
  std::vector<FiniteSubset> stage_union;
  size_t next = 1;
  for (size_t k = 0; k < c_schedule.size(); ++k) {
    res.stage_starts.push_back(res.indices.size());
    stage_union.push_back(FiniteSubset{});
    size_t taken = 0;
    while (taken < per_stage && next <= horizon) {
      const FiniteSubset& cand = seq.at(next);
      bool ok = true;
      for (size_t j = 0; j <= k && ok; ++j) {
        if (stage_union[j].empty()) continue;
        FiniteSubset inv = set_inverse(stage_union[j]);
        Rat left(set_product(inv, cand).cardinality(), cand.cardinality());
        Rat right(set_product(cand, inv).cardinality(), cand.cardinality());
        if (left > c_schedule[j] || right > c_schedule[j]) ok = false;
      }
      if (ok) {
        res.indices.push_back(next);
        for (size_t j = 0; j <= k; ++j)
          stage_union[j] = stage_union[j].empty() ? cand : stage_union[j].unite(cand);
        ++taken;
      }
      ++next;
    }
    if (taken < per_stage) return res;  // partial: horizon exhausted
  }
  res.complete = true;
  return res;
}

Rat folner_defect(const FoelnerSequence& seq, const FiniteSubset& K, size_t n) {
  const FiniteSubset& fn = seq.at(n);
  Rat worst = 0;
  for (const auto& g : K.elements()) {
    FiniteSubset shifted = translate(fn, g, Side::Left);
    worst = std::max(worst, Rat(fn.symdiff_size(shifted), fn.cardinality()));
  }
  return worst;
}

// --- serialization ---------------------------------------------------------

void FoelnerSequence::serialize(std::ostream& os) const {
  os << "group " << group_.name() << "\n";
  os << "provenance " << provenance_ << "\n";
  for (auto& s : sets_) {
    os << "set ";
    if (s.has_runs()) {
      os << s.runs().to_text();
    } else {
      bool first = true;
      for (auto& e : s.elements()) {
        if (!first) os << ' ';
        first = false;
        os << element_text(e);
      }
    }
    os << "\n";
  }
}

FoelnerSequence FoelnerSequence::deserialize(std::istream& is) {
  std::string line;
  Group g = Group::integers();
  std::string provenance = "explicit";
  std::vector<FiniteSubset> sets;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "group") {
      std::string name;
      ls >> name;
      if (name == "Z") g = Group::integers();
      else if (name == "H3") g = Group::heisenberg();
      else if (name.rfind("Z^", 0) == 0) g = Group::integer_vector(std::stoi(name.substr(2)));
      else throw std::runtime_error("unknown group tag: " + name);
    } else if (tag == "provenance") {
      std::getline(ls >> std::ws, provenance);
    } else if (tag == "set") {
      std::string rest;
      std::getline(ls >> std::ws, rest);
      if (g.kind == GroupKind::Integers) {
        sets.push_back(FiniteSubset::from_intervals(IntervalSet::parse(rest)));
      } else {
        std::istringstream es(rest);
        std::string tok;
        std::vector<GroupElement> elems;
        while (es >> tok) elems.push_back(parse_element_text(tok));
        sets.push_back(FiniteSubset::from_elements(g, std::move(elems)));
      }
    } else {
      throw std::runtime_error("bad sequence line: " + line);
    }
  }
  return FoelnerSequence(g, std::move(sets), provenance);
}

}  // namespace ergolab
