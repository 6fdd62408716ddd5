#include "ergolab/covering.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ergolab/flow.hpp"

namespace ergolab {

namespace {

FiniteSubset first_elements(const FiniteSubset& s, const Int& k) {
  if (s.has_runs()) return FiniteSubset::from_intervals(s.runs().take_first(k));
  const auto& es = s.elements();
  size_t n = k >= Int(es.size()) ? es.size() : k.convert_to<size_t>();
  return FiniteSubset::from_elements(s.group(), {es.begin(), es.begin() + n});
}

Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(Int(s));
  return Rat(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
}

// exact flow certificate on the segment decomposition of the ground set
DisjointCertificate certify_by_flow(const std::vector<FiniteSubset>& family, const Rat& eps) {
  const size_t L = family.size();
  std::vector<Int> quota(L);
  Int quota_sum = 0;
  for (size_t j = 0; j < L; ++j) {
    quota[j] = witness_quota(family[j].cardinality(), eps);
    quota_sum += quota[j];
  }

  const bool all_runs =
      std::all_of(family.begin(), family.end(), [](auto& f) { return f.has_runs(); });

  // atoms: maximal ground segments with constant membership pattern
  struct Atom {
    Int lo, len;                    // Z path
    const GroupElement* elt = nullptr;  // element path (len = 1)
  };
  std::vector<Atom> atoms;
  std::vector<std::vector<size_t>> members;  // per atom: which sets contain it

  std::vector<GroupElement> universe;  // element path storage
  if (all_runs) {
    std::vector<Int> cuts;
    for (auto& f : family)
      for (auto& r : f.runs().runs()) {
        cuts.push_back(r.lo);
        cuts.push_back(r.hi + 1);
      }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (size_t t = 0; t + 1 < cuts.size(); ++t) {
      std::vector<size_t> m;
      for (size_t j = 0; j < L; ++j)
        if (family[j].runs().contains(cuts[t])) m.push_back(j);
      if (m.empty()) continue;
      atoms.push_back({cuts[t], cuts[t + 1] - cuts[t], nullptr});
      members.push_back(std::move(m));
    }
  } else {
    for (auto& f : family)
      for (auto& e : f.elements()) universe.push_back(e);
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    for (auto& e : universe) {
      std::vector<size_t> m;
      for (size_t j = 0; j < L; ++j)
        if (family[j].contains(e)) m.push_back(j);
      atoms.push_back({0, 1, &e});
      members.push_back(std::move(m));
    }
  }

  // source -> set (quota) -> atom (length) -> sink
  const size_t T = atoms.size();
  const size_t source = 0, sink = 1 + L + T;
  MaxFlow mf(sink + 1);
  std::vector<size_t> src_edges(L);
  std::vector<std::vector<std::pair<size_t, size_t>>> set_atom(L);  // (atom, handle)
  for (size_t j = 0; j < L; ++j) src_edges[j] = mf.add_edge(source, 1 + j, quota[j]);
  for (size_t t = 0; t < T; ++t) {
    for (size_t j : members[t])
      set_atom[j].push_back({t, mf.add_edge(1 + j, 1 + L + t, atoms[t].len)});
    mf.add_edge(1 + L + t, sink, atoms[t].len);
  }

  DisjointCertificate cert;
  if (mf.max_flow(source, sink) == quota_sum) {
    cert.feasible = true;
    // hand out disjoint chunks of each atom, cursor left-to-right
    std::vector<Int> cursor(T, 0);
    for (size_t j = 0; j < L; ++j) {
      std::vector<Run> rs;
      std::vector<GroupElement> es;
      for (auto [t, h] : set_atom[j]) {
        Int f = mf.flow(h);
        if (f == 0) continue;
        if (all_runs) {
          rs.push_back({atoms[t].lo + cursor[t], atoms[t].lo + cursor[t] + f - 1});
        } else {
          es.push_back(*atoms[t].elt);
        }
        cursor[t] += f;
      }
      cert.witnesses.push_back(all_runs
                                   ? FiniteSubset::from_intervals(IntervalSet::from_runs(rs))
                                   : FiniteSubset::from_elements(family[j].group(), es));
    }
    return cert;
  }

  // Hall violator: the sets on the source side of a minimum cut demand more
  // than their joint ground set holds
  auto side = mf.min_cut_side(source);
  FiniteSubset uni;
  for (size_t j = 0; j < L; ++j) {
    if (!side[1 + j]) continue;
    cert.deficient_indices.push_back(j);
    cert.deficient_quota += quota[j];
    uni = uni.empty() ? family[j] : uni.unite(family[j]);
  }
  cert.deficient_union_size = uni.cardinality();
  return cert;
}

}  // namespace

DisjointCertificate certify_epsilon_disjoint(const std::vector<FiniteSubset>& family,
                                             const Rat& eps) {
  if (!(eps >= 0 && eps < 1)) throw std::invalid_argument("eps in [0,1) required");
  for (size_t j = 1; j < family.size(); ++j)
    if (!(family[j].group() == family[0].group()))
      throw std::invalid_argument("family group mismatch");

  // greedy pass: earlier sets grab their first available elements
  DisjointCertificate cert;
  cert.feasible = true;
  FiniteSubset used;
  for (auto& f : family) {
    Int quota = witness_quota(f.cardinality(), eps);
    FiniteSubset avail = used.empty() ? f : f.difference(used);
    if (avail.cardinality() < quota) {
      cert.feasible = false;
      break;
    }
    FiniteSubset w = first_elements(avail, quota);
    used = used.empty() ? w : used.unite(w);
    cert.witnesses.push_back(std::move(w));
  }
  if (cert.feasible) return cert;
  cert.witnesses.clear();
  return certify_by_flow(family, eps);
}

DisjointifyResult epsilon_disjointify(const std::vector<FiniteSubset>& scales,
                                      const std::vector<FiniteSubset>& centers,
                                      const Rat& eps) {
  if (!(eps > 0 && eps <= Rat(1, 2))) throw std::invalid_argument("eps in (0,1/2] required");
  if (scales.size() != centers.size() || scales.empty())
    throw std::invalid_argument("scales/centers size mismatch");
  const size_t L = scales.size();
  Int total_centers = 0;
  for (size_t i = 0; i < L; ++i) {
    total_centers += centers[i].cardinality();
    for (size_t j = i + 1; j < L; ++j)
      if (centers[i].intersection_size(centers[j]) != 0)
        throw std::invalid_argument("center sets must be pairwise disjoint");
  }
  if (L >= 2) {
    auto rep = tempered_report(FoelnerSequence(scales[0].group(), scales, "disjointify"), L);
    if (rep.max_left > 2)
      throw std::invalid_argument("scale family is not 2-tempered (left ratio " +
                                  rat_str(rep.max_left) + ")");
  }

  DisjointifyResult res;
  res.selected.assign(L, {});
  FiniteSubset acc;
  for (size_t j = L; j-- > 0;) {
    for (const auto& d : centers[j].elements()) {
      FiniteSubset t = translate(scales[j], d, Side::Right);
      FiniteSubset avail = acc.empty() ? t : t.difference(acc);
      if (Rat(avail.cardinality()) >= (Rat(1) - eps) * Rat(t.cardinality())) {
        res.selected[j].push_back(d);
        res.witnesses.push_back(avail);
        acc = acc.empty() ? t : acc.unite(t);
      }
    }
  }
  res.union_set = acc;
  res.union_bound_ok =
      Rat(acc.cardinality()) >= eps / 5 * Rat(total_centers);
  return res;
}

// --- vitali -----------------------------------------------------------------

void ScaleAssignment::validate(size_t horizon) const {
  if (centers.size() != scales.size())
    throw std::invalid_argument("assignment centers/scales size mismatch");
  const size_t q_len = q();
  for (size_t i = 0; i < centers.size(); ++i) {
    const auto& sc = scales[i];
    if (sc.size() != q_len || q_len == 0)
      throw std::invalid_argument("assignment lists must share a positive length");
    for (size_t k = 0; k < sc.size(); ++k) {
      if (sc[k] < 1 || sc[k] > horizon)
        throw std::invalid_argument("assigned scale outside horizon");
      if (k > 0 && sc[k] <= sc[k - 1])
        throw std::invalid_argument("assigned scales must be strictly increasing");
    }
  }
}

namespace {

// property (1) of goodness alone: small product-set overflow at every level
bool overflow_condition_holds(const FoelnerSequence& seq, const Rat& lambda, size_t horizon) {
  FiniteSubset prefix = seq.at(1);
  for (size_t n = 2; n <= horizon; ++n) {
    const FiniteSubset& fn = seq.at(n);
    FiniteSubset prod = set_product(set_inverse(prefix), fn);
    Int overflow = prod.cardinality() - prod.intersection_size(fn);
    if (Rat(overflow, fn.cardinality()) > lambda) return false;
    prefix = prefix.unite(fn);
  }
  return true;
}

}  // namespace

CoveringSelection vitali_select(const FoelnerSequence& seq, const FiniteSubset& C,
                                const ScaleAssignment& assignment, const Rat& eps,
                                bool overflow_condition_only) {
  if (!(eps > 0 && eps <= Rat(1, 2))) throw std::invalid_argument("eps in (0,1/2] required");
  assignment.validate(seq.horizon());
  if (C.empty()) throw std::invalid_argument("empty center set");
  const size_t q = assignment.q();
  const Rat lambda = eps / 8;
  size_t max_scale = 0;
  for (auto& sc : assignment.scales) max_scale = std::max(max_scale, sc.back());
  bool pre_ok = true;
  std::string pre_note;
  if (Rat(Int(q)) * eps * eps < 20) {
    pre_ok = false;
    pre_note = "q below 20/eps^2; ";
  }
  const bool good = overflow_condition_only
                        ? overflow_condition_holds(seq, lambda, max_scale)
                        : is_lambda_good(seq, lambda, max_scale).good;
  if (!good) {
    pre_ok = false;
    pre_note += "sequence not eps/8-good up to the assigned scales; ";
  }

  // every center must carry an assignment
  std::map<GroupElement, const std::vector<size_t>*> by_center;
  for (size_t i = 0; i < assignment.centers.size(); ++i)
    by_center[assignment.centers[i]] = &assignment.scales[i];
  for (const auto& c : C.elements())
    if (!by_center.count(c)) throw std::invalid_argument("center without scale assignment");

  // scale -> centers assigned that scale, canonical order
  std::map<size_t, std::vector<GroupElement>> section;
  for (const auto& c : C.elements())
    for (size_t n : *by_center[c]) section[n].push_back(c);

  // cumulative prefix unions of the sequence, index n -> union of F_1..F_n
  std::vector<FiniteSubset> prefix(max_scale + 1);
  prefix[1] = seq.at(1);
  for (size_t n = 2; n <= max_scale; ++n) prefix[n] = prefix[n - 1].unite(seq.at(n));

  CoveringSelection sel;
  sel.eps = eps;
  sel.preconditions_ok = pre_ok;
  sel.precondition_note = pre_note;
  FiniteSubset W = C;  // surviving centers, shrunk by the masks of higher scales
  FiniteSubset uni;
  for (auto it = section.rbegin(); it != section.rend(); ++it) {
    const size_t n = it->first;
    if (W.empty()) break;
    std::vector<GroupElement> cn;
    for (const auto& c : it->second)
      if (W.contains(c)) cn.push_back(c);
    if (cn.empty()) continue;
    auto dj = epsilon_disjointify({seq.at(n)},
                                  {FiniteSubset::from_elements(C.group(), cn)}, eps);
    if (dj.selected[0].empty()) continue;
    for (size_t i = 0; i < dj.selected[0].size(); ++i)
      sel.pairs.push_back({dj.selected[0][i], n, dj.witnesses[i]});
    uni = uni.empty() ? dj.union_set : uni.unite(dj.union_set);
    if (n > 1) {
      // mask: centers whose lower-scale windows could touch this pick
      FiniteSubset dn = FiniteSubset::from_elements(C.group(), dj.selected[0]);
      FiniteSubset blocked =
          set_product(set_product(set_inverse(prefix[n - 1]), seq.at(n)), dn);
      W = W.difference(blocked);
    }
  }
  sel.union_set = uni;
  sel.coverage = Rat(uni.intersection_size(C), C.cardinality());
  if (Rat(uni.cardinality()) >= 2 * Rat(C.cardinality()))
    sel.outcome = CoverOutcome::Expansive;
  else if (sel.coverage >= Rat(1) - eps)
    sel.outcome = CoverOutcome::Covering;
  else
    sel.outcome = CoverOutcome::PostconditionFailed;
  return sel;
}

// --- growth step ------------------------------------------------------------

bool growth_constants_ok(const Rat& alpha, const Rat& beta, const Rat& bound_s,
                         const Rat& eps, const Rat& delta) {
  if (!(0 < alpha && alpha < beta && bound_s > 0 && eps > 0 && eps < Rat(1, 4) && delta > 0))
    return false;
  if (!((beta - 4 * eps * bound_s) * (1 - eps) / alpha >= 1 + delta)) return false;
  if (!((1 - eps) * (1 + delta) >= 1 + delta / 2)) return false;
  if (!((1 - eps) * (1 + delta / 2) >= 1)) return false;
  return true;
}

const std::vector<size_t>& OrbitData::up_for(const GroupElement& c) const {
  for (size_t i = 0; i < centers.size(); ++i)
    if (centers[i] == c) return up_scales[i];
  throw std::out_of_range("center missing from orbit data");
}

const std::vector<size_t>& OrbitData::down_for(const GroupElement& c) const {
  for (size_t i = 0; i < centers.size(); ++i)
    if (centers[i] == c) return down_scales[i];
  throw std::out_of_range("center missing from orbit data");
}

namespace {

// next q crossing scales strictly above `after`; throws when the orbit runs dry
std::vector<size_t> next_crossings(const std::vector<size_t>& all, size_t after, size_t q) {
  std::vector<size_t> out;
  for (size_t n : all) {
    if (n > after) out.push_back(n);
    if (out.size() == q) return out;
  }
  throw std::runtime_error("insufficient crossings in orbit data");
}

struct MappedBack {
  std::vector<CoverPair> pairs;  // centers are original B_k centers
  FiniteSubset union_set;
};

// one half-step: cover the current union with windows drawn from per-center
// crossings, then pull the selection back to the original centers
MappedBack half_step(const FoelnerSequence& seq, const FiniteSubset& ck,
                     const std::vector<CoverPair>& source_pairs, const OrbitData& orbit,
                     bool use_down, const Rat& eps, size_t q) {
  // canonical pair order for the g -> c(g) choice
  std::vector<const CoverPair*> ordered;
  for (auto& p : source_pairs) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(), [](const CoverPair* a, const CoverPair* b) {
    return a->center != b->center ? a->center < b->center : a->scale < b->scale;
  });

  ScaleAssignment assign;
  std::vector<const CoverPair*> owner;  // parallel to assign.centers
  for (const auto& g : ck.elements()) {
    const CoverPair* src = nullptr;
    for (auto* p : ordered) {
      if (translate(seq.at(p->scale), p->center, Side::Right).contains(g)) {
        src = p;
        break;
      }
    }
    if (!src) throw std::logic_error("union element without a source window");
    const auto& crossings =
        use_down ? orbit.down_for(src->center) : orbit.up_for(src->center);
    assign.centers.push_back(g);
    assign.scales.push_back(next_crossings(crossings, src->scale, q));
    owner.push_back(src);
  }

  auto sel = vitali_select(seq, ck, assign, eps);

  MappedBack out;
  std::map<std::pair<GroupElement, size_t>, FiniteSubset> dedup;
  for (auto& p : sel.pairs) {
    // find the owner of this picked center g
    size_t i = std::lower_bound(assign.centers.begin(), assign.centers.end(), p.center) -
               assign.centers.begin();
    const GroupElement& c = owner[i]->center;
    FiniteSubset window = translate(seq.at(p.scale), c, Side::Right);
    auto key = std::make_pair(c, p.scale);
    if (!dedup.count(key)) dedup[key] = p.witness.intersect(window);
  }
  for (auto& [key, wit] : dedup) {
    FiniteSubset window = translate(seq.at(key.second), key.first, Side::Right);
    out.pairs.push_back({key.first, key.second, wit});
    out.union_set = out.union_set.empty() ? window : out.union_set.unite(window);
  }
  return out;
}

}  // namespace

GrowthResult growth_step(const FoelnerSequence& seq, const OrbitData& orbit,
                         const CoveringSelection& bk, const GrowthParams& p) {
  if (!growth_constants_ok(p.alpha, p.beta, p.bound_s, p.eps, p.delta))
    throw std::invalid_argument("growth constants violate the gating inequalities");
  GrowthResult res;
  res.next.eps = p.eps;
  res.next.outcome = CoverOutcome::Covering;
  if (bk.pairs.empty()) return res;  // vacuous

  FiniteSubset ck;
  for (auto& pr : bk.pairs) {
    FiniteSubset w = translate(seq.at(pr.scale), pr.center, Side::Right);
    ck = ck.empty() ? w : ck.unite(w);
  }

  // downcrossing sweep over the union, then upcrossing sweep over its union
  MappedBack down = half_step(seq, ck, bk.pairs, orbit, true, p.eps / 2, p.q);
  MappedBack up = half_step(seq, down.union_set, down.pairs, orbit, false, p.eps / 2, p.q);

  res.next.pairs = up.pairs;
  res.next.union_set = up.union_set;
  res.next.coverage = Rat(up.union_set.intersection_size(ck), ck.cardinality());
  res.growth = Rat(up.union_set.cardinality(), ck.cardinality());

  // conclusion (i): picked scales lie within the first n_k + 2q upcrossings
  // conclusion (ii): the translated family is eps-disjoint at the witnesses
  bool ok = true;
  FiniteSubset used;
  for (auto& pr : res.next.pairs) {
    const auto& ups = orbit.up_for(pr.center);
    size_t limit = std::min(ups.size(), p.n_k + 2 * p.q);
    bool found = std::find(ups.begin(), ups.begin() + limit, pr.scale) != ups.begin() + limit;
    FiniteSubset window = translate(seq.at(pr.scale), pr.center, Side::Right);
    if (!found || (!used.empty() && used.intersection_size(pr.witness) != 0) ||
        Rat(pr.witness.cardinality()) < (1 - p.eps) * Rat(window.cardinality()))
      ok = false;
    used = used.empty() ? pr.witness : used.unite(pr.witness);
  }
  res.next.outcome = ok ? CoverOutcome::Covering : CoverOutcome::PostconditionFailed;
  return res;
}

// --- serialization ----------------------------------------------------------

void ScaleAssignment::serialize(std::ostream& os) const {
  for (size_t i = 0; i < centers.size(); ++i) {
    os << "center " << element_text(centers[i]) << " scales";
    for (size_t n : scales[i]) os << ' ' << n;
    os << "\n";
  }
}

ScaleAssignment ScaleAssignment::deserialize(std::istream& is) {
  ScaleAssignment a;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag, elt, kw;
    ls >> tag >> elt >> kw;
    if (tag != "center" || kw != "scales")
      throw std::runtime_error("bad assignment line: " + line);
    a.centers.push_back(parse_element_text(elt));
    std::vector<size_t> sc;
    size_t n;
    while (ls >> n) sc.push_back(n);
    a.scales.push_back(std::move(sc));
  }
  return a;
}

namespace {

void write_set(std::ostream& os, const FiniteSubset& s) {
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
}

FiniteSubset read_set(const Group& g, const std::string& body) {
  if (g.kind == GroupKind::Integers)
    return FiniteSubset::from_intervals(IntervalSet::parse(body));
  std::istringstream is(body);
  std::string tok;
  std::vector<GroupElement> es;
  while (is >> tok) es.push_back(parse_element_text(tok));
  return FiniteSubset::from_elements(g, std::move(es));
}

}  // namespace

void CoveringSelection::serialize(std::ostream& os) const {
  os << "eps " << rat_str(eps) << "\n";
  os << "outcome "
     << (outcome == CoverOutcome::Expansive
             ? "expansive"
             : outcome == CoverOutcome::Covering ? "covering" : "failed")
     << "\n";
  os << "coverage " << rat_str(coverage) << "\n";
  for (auto& p : pairs) {
    os << "pair " << element_text(p.center) << ' ' << p.scale << " witness ";
    write_set(os, p.witness);
    os << "\n";
  }
}

CoveringSelection CoveringSelection::deserialize(std::istream& is, const Group& g) {
  CoveringSelection sel;
  std::string line;
  FiniteSubset uni;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "eps") {
      std::string v;
      ls >> v;
      sel.eps = parse_rat(v);
    } else if (tag == "outcome") {
      std::string v;
      ls >> v;
      sel.outcome = v == "expansive" ? CoverOutcome::Expansive
                    : v == "covering" ? CoverOutcome::Covering
                                      : CoverOutcome::PostconditionFailed;
    } else if (tag == "coverage") {
      std::string v;
      ls >> v;
      sel.coverage = parse_rat(v);
    } else if (tag == "pair") {
      std::string elt, kw;
      size_t scale;
      ls >> elt >> scale >> kw;
      if (kw != "witness") throw std::runtime_error("bad pair line: " + line);
      std::string rest;
      std::getline(ls >> std::ws, rest);
      sel.pairs.push_back({parse_element_text(elt), scale, read_set(g, rest)});
    } else {
      throw std::runtime_error("bad selection line: " + line);
    }
  }
  return sel;
}

}  // namespace ergolab
