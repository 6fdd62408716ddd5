#include "ergolab/counterexample.hpp"

#include <algorithm>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "ergolab/dynamics.hpp"

namespace ergolab {

namespace {

Int rfloor(const Rat& v) {  // floor for v >= 0
  return Int(numerator(v) / denominator(v));
}

size_t words_for(long long m) { return static_cast<size_t>((m + 63) / 64); }

bool bit_get(const std::vector<uint64_t>& w, long long r) {
  return (w[static_cast<size_t>(r >> 6)] >> (r & 63)) & 1u;
}

void bit_set(std::vector<uint64_t>& w, long long r) {
  w[static_cast<size_t>(r >> 6)] |= uint64_t(1) << (r & 63);
}

Int mask_popcount(const std::vector<uint64_t>& w) {
  Int n = 0;
  for (uint64_t x : w) n += __builtin_popcountll(x);
  return n;
}

// elements of [lo, hi] whose residue mod m is allowed by the mask
Int count_range(const std::vector<uint64_t>& mask, long long m, const Int& lo,
                const Int& hi) {
  if (lo > hi) return 0;
  Int n = hi - lo + 1;
  Int total = (n / m) * mask_popcount(mask);
  long long rem = (n % m).convert_to<long long>();
  long long start = ((lo % m + m) % m).convert_to<long long>();
  for (long long i = 0; i < rem; ++i)
    if (bit_get(mask, (start + i) % m)) ++total;
  return total;
}

}  // namespace

int phase_indicator(long long l, const Int& t) {
  if (l < 1 || t < 0) throw std::invalid_argument("need l >= 1 and t >= 0");
  return t % (2 * l) < l ? 1 : 0;
}

// --- BandSet ------------------------------------------------------------

BandSet normalize_segments(long long m, std::vector<BandSet::Segment> in) {
  BandSet out(m);
  std::vector<Int> bounds;
  for (auto& s : in) {
    if (s.lo > s.hi) continue;
    bounds.push_back(s.lo);
    bounds.push_back(s.hi + 1);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  for (size_t t = 0; t + 1 < bounds.size(); ++t) {
    const Int& a = bounds[t];
    Int b = bounds[t + 1] - 1;
    std::vector<uint64_t> acc(words_for(m), 0);
    bool any = false;
    for (auto& s : in) {
      if (s.lo <= a && b <= s.hi) {
        for (size_t w = 0; w < acc.size(); ++w) acc[w] |= s.mask[w];
        any = true;
      }
    }
    if (!any) continue;
    // trim endpoints to actual elements so min/max read off the segment
    Int lo = a, hi = b;
    while (lo <= hi && !bit_get(acc, ((lo % m + m) % m).convert_to<long long>())) ++lo;
    while (lo <= hi && !bit_get(acc, ((hi % m + m) % m).convert_to<long long>())) --hi;
    if (lo > hi) continue;
    if (!out.segs_.empty() && out.segs_.back().mask == acc &&
        out.segs_.back().hi + 1 >= lo) {
      // adjacency after trimming can leave a sub-period gap; merging is only
      // sound when the gap holds no allowed residue, which trimming ensures
      // for gaps shorter than one period
      if (lo - out.segs_.back().hi <= m) {
        bool gap_clear = true;
        for (Int v = out.segs_.back().hi + 1; v < lo; ++v)
          if (bit_get(acc, ((v % m + m) % m).convert_to<long long>())) {
            gap_clear = false;
            break;
          }
        if (gap_clear) {
          out.segs_.back().hi = hi;
          continue;
        }
      }
    }
    out.segs_.push_back({lo, hi, std::move(acc)});
  }
  return out;
}

BandSet BandSet::interval(long long modulus, const Int& lo, const Int& hi) {
  BandSet s(modulus);
  if (lo > hi) return s;
  Segment seg{lo, hi, std::vector<uint64_t>(words_for(modulus), ~uint64_t(0))};
  // clear bits past the modulus so popcounts stay honest
  for (long long r = modulus; r < static_cast<long long>(64 * seg.mask.size()); ++r)
    seg.mask[static_cast<size_t>(r >> 6)] &= ~(uint64_t(1) << (r & 63));
  s.segs_.push_back(std::move(seg));
  return s;
}

BandSet BandSet::band(long long modulus, const Int& lo, const Int& hi, long long r1,
                      long long r2) {
  BandSet s(modulus);
  if (lo > hi || r1 > r2) return s;
  Segment seg{lo, hi, std::vector<uint64_t>(words_for(modulus), 0)};
  for (long long r = r1; r <= r2; ++r) bit_set(seg.mask, r);
  std::vector<Segment> v{std::move(seg)};
  return normalize_segments(modulus, std::move(v));
}

Int BandSet::cardinality() const {
  Int n = 0;
  for (auto& s : segs_) n += count_range(s.mask, m_, s.lo, s.hi);
  return n;
}

Int BandSet::max() const {
  if (segs_.empty()) throw std::logic_error("max of empty set");
  return segs_.back().hi;  // trimmed at normalization
}

Int BandSet::min() const {
  if (segs_.empty()) throw std::logic_error("min of empty set");
  return segs_.front().lo;
}

BandSet BandSet::unite(const BandSet& o) const {
  if (m_ != o.m_) throw std::invalid_argument("modulus mismatch");
  std::vector<Segment> all = segs_;
  all.insert(all.end(), o.segs_.begin(), o.segs_.end());
  return normalize_segments(m_, std::move(all));
}

BandSet BandSet::translate(const Int& d) const {
  long long rot = ((d % m_ + m_) % m_).convert_to<long long>();
  std::vector<Segment> out;
  for (auto& s : segs_) {
    Segment t{s.lo + d, s.hi + d, std::vector<uint64_t>(words_for(m_), 0)};
    for (long long r = 0; r < m_; ++r)
      if (bit_get(s.mask, r)) bit_set(t.mask, (r + rot) % m_);
    out.push_back(std::move(t));
  }
  return normalize_segments(m_, std::move(out));
}

BandSet BandSet::negate() const {
  std::vector<Segment> out;
  for (auto& s : segs_) {
    Segment t{-s.hi, -s.lo, std::vector<uint64_t>(words_for(m_), 0)};
    for (long long r = 0; r < m_; ++r)
      if (bit_get(s.mask, r)) bit_set(t.mask, (m_ - r) % m_);
    out.push_back(std::move(t));
  }
  return normalize_segments(m_, std::move(out));
}

BandSet BandSet::minkowski_sum(const BandSet& o) const {
  if (m_ != o.m_) throw std::invalid_argument("modulus mismatch");
  const long long m = m_;
  std::vector<Segment> acc;

  auto emit_elements = [&](const std::vector<Int>& vals) {
    if (vals.empty()) return;
    // width below one period: every value owns its residue
    Segment s{vals.front(), vals.front(), std::vector<uint64_t>(words_for(m), 0)};
    for (const Int& v : vals) {
      s.lo = std::min(s.lo, v);
      s.hi = std::max(s.hi, v);
      bit_set(s.mask, ((v % m + m) % m).convert_to<long long>());
    }
    acc.push_back(std::move(s));
  };

  auto elements_in = [&](const Segment& s, const Int& from, const Int& to) {
    std::vector<Int> out;
    for (Int v = std::max(s.lo, from); v <= std::min(s.hi, to); ++v)
      if (bit_get(s.mask, ((v % m + m) % m).convert_to<long long>())) out.push_back(v);
    return out;
  };

  for (const Segment& p : segs_) {
    for (const Segment& q : o.segs_) {
      Int lp = p.hi - p.lo + 1, lq = q.hi - q.lo + 1;
      if (lp < 3 * m || lq < 3 * m) {
        // expand the narrow side element by element
        const Segment& small = lp <= lq ? p : q;
        const Segment& big = lp <= lq ? q : p;
        for (const Int& e : elements_in(small, small.lo, small.hi)) {
          Segment t{big.lo + e, big.hi + e, std::vector<uint64_t>(words_for(m), 0)};
          long long rot = ((e % m + m) % m).convert_to<long long>();
          for (long long r = 0; r < m; ++r)
            if (bit_get(big.mask, r)) bit_set(t.mask, (r + rot) % m);
          acc.push_back(std::move(t));
        }
        continue;
      }
      // wide-by-wide: the banded product form is exact at distance >= m-1
      // from both ends (any residue pair finds representatives inside a
      // window of one full period); the two end zones are brute-forced
      Int lo_sum = p.lo + q.lo, hi_sum = p.hi + q.hi;
      Segment core{lo_sum + (m - 1), hi_sum - (m - 1),
                   std::vector<uint64_t>(words_for(m), 0)};
      for (long long r1 = 0; r1 < m; ++r1) {
        if (!bit_get(p.mask, r1)) continue;
        for (long long r2 = 0; r2 < m; ++r2)
          if (bit_get(q.mask, r2)) bit_set(core.mask, (r1 + r2) % m);
      }
      acc.push_back(std::move(core));
      auto pa = elements_in(p, p.lo, p.lo + m - 2);
      auto qa = elements_in(q, q.lo, q.lo + m - 2);
      std::vector<Int> zone;
      for (const Int& a : pa)
        for (const Int& b : qa)
          if (a + b <= lo_sum + m - 2) zone.push_back(a + b);
      emit_elements(zone);
      zone.clear();
      auto pb = elements_in(p, p.hi - m + 2, p.hi);
      auto qb = elements_in(q, q.hi - m + 2, q.hi);
      for (const Int& a : pb)
        for (const Int& b : qb)
          if (a + b >= hi_sum - m + 2) zone.push_back(a + b);
      emit_elements(zone);
    }
  }
  return normalize_segments(m, std::move(acc));
}

Int BandSet::symdiff_size(const BandSet& o) const {
  if (m_ != o.m_) throw std::invalid_argument("modulus mismatch");
  std::vector<Int> bounds;
  for (auto& s : segs_) { bounds.push_back(s.lo); bounds.push_back(s.hi + 1); }
  for (auto& s : o.segs_) { bounds.push_back(s.lo); bounds.push_back(s.hi + 1); }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
  const std::vector<uint64_t> zero(words_for(m_), 0);
  Int total = 0;
  for (size_t t = 0; t + 1 < bounds.size(); ++t) {
    const Int& a = bounds[t];
    Int b = bounds[t + 1] - 1;
    const std::vector<uint64_t>* ma = &zero;
    const std::vector<uint64_t>* mb = &zero;
    for (auto& s : segs_)
      if (s.lo <= a && b <= s.hi) { ma = &s.mask; break; }
    for (auto& s : o.segs_)
      if (s.lo <= a && b <= s.hi) { mb = &s.mask; break; }
    if (ma == mb) continue;
    std::vector<uint64_t> x(words_for(m_));
    bool any = false;
    for (size_t w = 0; w < x.size(); ++w) {
      x[w] = (*ma)[w] ^ (*mb)[w];
      any = any || x[w];
    }
    if (any) total += count_range(x, m_, a, b);
  }
  return total;
}

Int BandSet::phase_count(const Int& shift) const {
  const long long l = m_ / 2;
  long long sh = ((shift % m_ + m_) % m_).convert_to<long long>();
  Int total = 0;
  for (auto& s : segs_) {
    std::vector<uint64_t> keep(words_for(m_), 0);
    for (long long r = 0; r < m_; ++r)
      if (bit_get(s.mask, r) && (r + sh) % m_ < l) bit_set(keep, r);
    total += count_range(keep, m_, s.lo, s.hi);
  }
  return total;
}

IntervalSet BandSet::to_interval_set(size_t run_cap) const {
  std::vector<Run> runs;
  for (auto& s : segs_) {
    // maximal residue runs of the mask
    std::vector<std::pair<long long, long long>> rruns;
    long long r = 0;
    while (r < m_) {
      if (!bit_get(s.mask, r)) { ++r; continue; }
      long long r2 = r;
      while (r2 + 1 < m_ && bit_get(s.mask, r2 + 1)) ++r2;
      rruns.push_back({r, r2});
      r = r2 + 1;
    }
    Int base = s.lo - ((s.lo % m_ + m_) % m_);
    for (Int cyc = base; cyc <= s.hi; cyc += m_) {
      for (auto& [r1, r2] : rruns) {
        Int lo = std::max(Int(cyc + r1), s.lo), hi = std::min(Int(cyc + r2), s.hi);
        if (lo > hi) continue;
        runs.push_back({lo, hi});
        if (runs.size() > run_cap)
          throw std::length_error("run materialization exceeds the configured cap");
      }
    }
  }
  return IntervalSet::from_runs(std::move(runs));
}

// --- block sequences ----------------------------------------------------

BlockSequence build_block_sequence(const Rat& lambda, long long l, long long pairs) {
  if (!(lambda > 0) || l < 4 || pairs < 1)
    throw std::invalid_argument("need lambda > 0, l >= 4, pairs >= 1");
  BlockSequence b;
  b.lambda = lambda;
  b.l = l;
  b.pairs = pairs;
  const long long m = 2 * l;
  Int M = Int(l) * l;
  b.maxima.push_back(M);
  for (long long n = 1; n <= 2 * pairs; ++n) {
    Int solid_hi = rfloor(Rat(2 * M) / lambda);
    Int band_hi = rfloor(Rat((2 + lambda) * M) / lambda);
    BandSet a = BandSet::interval(m, 0, solid_hi);
    if (n % 2 == 1) {
      a = a.unite(BandSet::band(m, 0, band_hi, 0, l - 1));
    } else {
      a = a.unite(BandSet::band(m, 0, band_hi - m + 1, l, m - 1));
    }
    M = a.max();
    b.maxima.push_back(M);
    b.sets.push_back(std::move(a));
  }
  return b;
}

IntervalSet BlockSequence::runs(size_t n, size_t run_cap) const {
  if (n < 1 || n > sets.size()) throw std::out_of_range("block index");
  return sets[n - 1].to_interval_set(run_cap);
}

BlockTemperedCheck verify_property_a(const BlockSequence& b) {
  BlockTemperedCheck out;
  out.pass = true;
  const Rat bound = 1 + b.lambda;
  BandSet u = BandSet::interval(2 * b.l, 0, b.maxima[0]);  // scale-0 convention
  for (auto& a : b.sets) {
    BandSet sum = u.negate().minkowski_sum(a);
    Rat ratio(sum.cardinality(), a.cardinality());
    out.pass = out.pass && ratio <= bound;
    out.ratios.push_back(std::move(ratio));
    u = u.unite(a);
  }
  return out;
}

BlockInvarianceCheck verify_property_b(const BlockSequence& b) {
  BlockInvarianceCheck out;
  out.max_ratio = 0;
  for (auto& a : b.sets) {
    Int card = a.cardinality();
    for (long long s = 1; s * s <= b.l; ++s) {
      for (long long sgn : {1, -1}) {
        Rat ratio(a.symdiff_size(a.translate(sgn * s)), card);
        out.max_ratio = std::max(out.max_ratio, ratio);
      }
    }
  }
  // max_ratio <= 2/sqrt(l), squared to stay rational
  out.pass = numerator(out.max_ratio) * numerator(out.max_ratio) * b.l <=
             4 * denominator(out.max_ratio) * denominator(out.max_ratio);
  return out;
}

Rat block_gap_low(const Rat& lambda) { return Rat(1, 2) - lambda / (5 * (4 + lambda)); }
Rat block_gap_high(const Rat& lambda) { return Rat(1, 2) + lambda / (5 * (4 + lambda)); }

BlockFluctuationCheck verify_property_c(const BlockSequence& b, long long offset,
                                        long long shift) {
  if (offset < 0 || 4 * offset > b.l || shift < 0)
    throw std::invalid_argument("need 0 <= offset <= l/4 and shift >= 0");
  BlockFluctuationCheck out;
  out.alpha = block_gap_low(b.lambda);
  out.beta = block_gap_high(b.lambda);
  out.bound_separated = b.lambda * b.l > 80 * (4 + b.lambda);
  for (auto& a : b.sets)
    out.averages.push_back(Rat(a.phase_count(2 * b.l * shift + offset), a.cardinality()));
  bool seeking_high = true;
  for (const Rat& v : out.averages) {
    if (seeking_high) {
      if (v >= out.beta) seeking_high = false;
    } else if (v <= out.alpha) {
      seeking_high = true;
      ++out.downward_crossings;
    }
  }
  out.pass = out.downward_crossings == static_cast<size_t>(b.pairs);
  return out;
}

FoelnerSequence build_concatenated_foelner(const Rat& lambda, long long l0,
                                           long long pairs, size_t stages,
                                           bool desk) {
  if (!desk && l0 <= 100)
    throw std::invalid_argument("faithful mode requires l0 > 100");
  std::vector<FiniteSubset> sets;
  long long lm = l0;
  for (size_t s = 0; s < stages; ++s) {
    long long np = desk ? pairs : lm;
    BlockSequence block = build_block_sequence(lambda, lm, np);
    for (long long n = 1; n <= 2 * np; ++n)
      sets.push_back(FiniteSubset::from_intervals(block.runs(static_cast<size_t>(n))));
    if (s + 1 < stages) {
      Int next = block.maxima.back();
      if (next > (Int(1) << 40))
        throw std::length_error("next block scale exceeds the desk budget");
      lm = next.convert_to<long long>();
    }
  }
  std::ostringstream prov;
  prov << "block-concat lambda=" << lambda << " l0=" << l0 << " pairs=" << pairs
       << " stages=" << stages << (desk ? " desk" : " faithful");
  return FoelnerSequence(Group::integers(), std::move(sets), prov.str());
}

// --- stage functions ----------------------------------------------------

StageFunction StageFunction::zero() {
  StageFunction f;
  f.mask_ = {0};
  return f;
}

int StageFunction::value(const Int& level) const {
  if (l_ == 0) return 0;
  Int t = ((level % period()) + period()) % period();
  size_t chunk = (t >> base_).convert_to<size_t>();
  if (!mask_[chunk]) return 0;
  return t % (2 * l_) < l_ ? 1 : 0;
}

namespace {

// # of z in [0, span) with (z + s0) mod m in [0, m/2)
long long phase_window(long long m, long long s0, long long span) {
  const long long l = m / 2;
  long long full = span / m, rem = span % m;
  long long c = full * l;
  // partial: residues [s0, s0 + rem) intersected with [0, l)
  if (s0 + rem <= m) {
    c += std::max<long long>(0, std::min(s0 + rem, l) - s0);
  } else {
    c += std::max<long long>(0, l - s0);
    c += std::min(s0 + rem - m, l);
  }
  return c;
}

// # of z in [a, b] with (z + s0) mod m in [0, m/2); a may exceed b
long long phase_count_ll(long long m, long long s0, long long a, long long b) {
  if (a > b) return 0;
  return phase_window(m, (s0 + a) % m, b - a + 1);
}

struct WindowSets {
  std::vector<std::vector<std::pair<long long, long long>>> runs;  // per scale
  std::vector<long long> card;
  long long extent = 0;  // max element over all scales
};

WindowSets collect_windows(const FoelnerSequence& seq, size_t horizon) {
  WindowSets w;
  for (size_t n = 1; n <= horizon; ++n) {
    const FiniteSubset& f = seq.at(n);
    if (!f.has_runs()) throw std::invalid_argument("window sets must be run-lists");
    std::vector<std::pair<long long, long long>> rs;
    long long card = 0;
    for (const Run& r : f.runs().runs()) {
      long long lo = r.lo.convert_to<long long>(), hi = r.hi.convert_to<long long>();
      if (lo < 0) throw std::invalid_argument("window sets must be nonnegative");
      rs.push_back({lo, hi});
      card += hi - lo + 1;
      w.extent = std::max(w.extent, hi);
    }
    w.runs.push_back(std::move(rs));
    w.card.push_back(card);
  }
  return w;
}

}  // namespace

Rat StageFunction::average(const Int& level, const IntervalSet& f_set) const {
  if (f_set.empty()) throw std::invalid_argument("empty averaging set");
  if (l_ == 0) return 0;
  const Int p = period();
  const long long m = 2 * l_;
  const Int chunk_len = Int(1) << base_;
  Int sum = 0;
  auto count_block = [&](Int a, Int b) {  // f-count on [a, b], a normalized >= 0
    Int total = 0;
    for (Int c = a >> base_; (c << base_) <= b; ++c) {
      size_t idx = static_cast<size_t>((c % Int(mask_.size())).convert_to<size_t>());
      if (!mask_[idx]) continue;
      Int lo = std::max(a, Int(c << base_)), hi = std::min(b, Int((c + 1) * chunk_len - 1));
      if (lo > hi) continue;
      long long s0 = (lo % m).convert_to<long long>();
      total += phase_window(m, s0, (hi - lo + 1).convert_to<long long>());
    }
    return total;
  };
  for (const Run& r : f_set.runs()) {
    Int a = level + r.lo, b = level + r.hi;
    Int shift = ((a % p) + p) % p - a;
    sum += count_block(a + shift, b + shift);
  }
  return Rat(sum, f_set.cardinality());
}

namespace {

// Trajectory classes for a stage function: a level is classified by its
// phase residue and, near a chunk boundary, by the distance to it and the
// mask bits on both sides. Every class has a constant average trajectory,
// so exact fluctuation measures reduce to closed-form class counts.
struct ClassTable {
  long long m = 0;
  std::vector<size_t> flc_interior;                // per residue, mask 1
  std::vector<size_t> flc_10, flc_01;              // per dist-1, combos
};

size_t lowfirst(const std::vector<Rat>& vals, const Rat& alpha, const Rat& beta) {
  size_t n = 0;
  bool low = true;
  for (const Rat& v : vals) {
    if (low) {
      if (v <= alpha) low = false;
    } else if (v >= beta) {
      low = true;
      ++n;
    }
  }
  return n;
}

ClassTable build_classes(const WindowSets& w, long long m, const Rat& alpha,
                         const Rat& beta) {
  ClassTable t;
  t.m = m;
  const size_t H = w.runs.size();
  std::vector<Rat> vals(H);
  for (long long rho = 0; rho < m; ++rho) {
    for (size_t n = 0; n < H; ++n) {
      long long c = 0;
      for (auto& [lo, hi] : w.runs[n]) c += phase_count_ll(m, rho, lo, hi);
      vals[n] = Rat(c, w.card[n]);
    }
    t.flc_interior.push_back(lowfirst(vals, alpha, beta));
  }
  const long long W = w.extent;
  t.flc_10.resize(static_cast<size_t>(W));
  t.flc_01.resize(static_cast<size_t>(W));
  std::vector<Rat> v10(H), v01(H);
  for (long long dist = 1; dist <= W; ++dist) {
    long long s0 = ((-dist) % m + m) % m;
    for (size_t n = 0; n < H; ++n) {
      long long before = 0, after = 0;
      for (auto& [lo, hi] : w.runs[n]) {
        before += phase_count_ll(m, s0, lo, std::min(hi, dist - 1));
        after += phase_count_ll(m, s0, std::max(lo, dist), hi);
      }
      v10[n] = Rat(before, w.card[n]);
      v01[n] = Rat(after, w.card[n]);
    }
    t.flc_10[static_cast<size_t>(dist - 1)] = lowfirst(v10, alpha, beta);
    t.flc_01[static_cast<size_t>(dist - 1)] = lowfirst(v01, alpha, beta);
  }
  return t;
}

// # of u in [0, hi] with u = rho (mod m); hi may be negative
Int residue_count(const Int& hi, long long rho, long long m) {
  if (hi < rho) return 0;
  return (hi - rho) / m + 1;
}

}  // namespace

std::vector<Rat> StageFunction::fluctuation_measure(const FoelnerSequence& seq,
                                                    const Rat& alpha, const Rat& beta,
                                                    size_t horizon,
                                                    const std::vector<long long>& n_list)
    const {
  std::vector<Rat> out;
  if (l_ == 0) {
    for (long long n : n_list) out.push_back(n <= 0 ? 1 : 0);
    return out;
  }
  WindowSets w = collect_windows(seq, horizon);
  const Int chunk_len = Int(1) << base_;
  if (w.extent + 1 >= chunk_len)
    throw std::invalid_argument("window extent must stay below the chunk size");
  const long long m = 2 * l_;
  ClassTable table = build_classes(w, m, alpha, beta);
  const size_t nchunk = mask_.size();
  Int ones = 0, a10 = 0, a01 = 0, a11 = 0;
  for (size_t c = 0; c < nchunk; ++c) {
    if (mask_[c]) ++ones;
    uint8_t x = mask_[c], y = mask_[(c + 1) % nchunk];
    if (x && !y) ++a10;
    if (!x && y) ++a01;
    if (x && y) ++a11;
  }
  const long long W = w.extent;
  const Int interior_hi = chunk_len - 1 - W;
  for (long long n : n_list) {
    if (n <= 0) {
      out.push_back(1);
      continue;
    }
    Int total = 0;
    for (long long rho = 0; rho < m; ++rho) {
      if (table.flc_interior[static_cast<size_t>(rho)] < static_cast<size_t>(n))
        continue;
      // interior levels plus boundary levels flanked by two selected chunks
      Int mult = ones * residue_count(interior_hi, rho, m);
      // dist in [1, W] with (-dist) mod m == rho, i.e. dist = (m - rho) mod m
      long long d0 = (m - rho) % m;
      if (d0 == 0) d0 = m;
      mult += a11 * residue_count(Int(W) - d0, 0, m);
      total += mult;
    }
    for (long long dist = 1; dist <= W; ++dist) {
      if (table.flc_10[static_cast<size_t>(dist - 1)] >= static_cast<size_t>(n))
        total += a10;
      if (table.flc_01[static_cast<size_t>(dist - 1)] >= static_cast<size_t>(n))
        total += a01;
    }
    out.push_back(Rat(total, period()));
  }
  return out;
}

std::vector<Int> StageFunction::chunk_profile(const FoelnerSequence& seq,
                                              const Rat& alpha, const Rat& beta,
                                              size_t horizon, long long n_fluct) const {
  if (l_ == 0) {
    return {n_fluct <= 0 ? (Int(1) << depth_) : Int(0)};
  }
  WindowSets w = collect_windows(seq, horizon);
  const Int chunk_len = Int(1) << base_;
  if (w.extent + 1 >= chunk_len)
    throw std::invalid_argument("window extent must stay below the chunk size");
  const long long m = 2 * l_;
  ClassTable table = build_classes(w, m, alpha, beta);
  const size_t nchunk = mask_.size();
  const long long W = w.extent;
  const Int interior_hi = chunk_len - 1 - W;
  // per-residue interior multiplicity of one selected chunk
  Int interior_mult = 0;
  std::vector<Int> res_mult(static_cast<size_t>(m));
  for (long long rho = 0; rho < m; ++rho)
    res_mult[static_cast<size_t>(rho)] = residue_count(interior_hi, rho, m);
  // boundary distances contributing per combo
  Int b10 = 0, b01 = 0;
  std::vector<Int> b11_res(static_cast<size_t>(m), 0);
  for (long long dist = 1; dist <= W; ++dist) {
    if (table.flc_10[static_cast<size_t>(dist - 1)] >= static_cast<size_t>(n_fluct))
      ++b10;
    if (table.flc_01[static_cast<size_t>(dist - 1)] >= static_cast<size_t>(n_fluct))
      ++b01;
  }
  for (long long rho = 0; rho < m; ++rho)
    if (table.flc_interior[static_cast<size_t>(rho)] >= static_cast<size_t>(n_fluct)) {
      interior_mult += res_mult[static_cast<size_t>(rho)];
      long long d0 = (m - rho) % m;
      if (d0 == 0) d0 = m;
      b11_res[static_cast<size_t>(rho)] = residue_count(Int(W) - d0, 0, m);
    }
  Int b11 = 0;
  for (auto& v : b11_res) b11 += v;
  std::vector<Int> out(nchunk, 0);
  for (size_t c = 0; c < nchunk; ++c) {
    if (n_fluct <= 0) {
      out[c] = chunk_len;
      continue;
    }
    uint8_t x = mask_[c], y = mask_[(c + 1) % nchunk];
    if (x) out[c] += interior_mult;
    if (x && y) out[c] += b11;
    if (x && !y) out[c] += b10;
    if (!x && y) out[c] += b01;
  }
  return out;
}

std::string StageFunction::serialize() const {
  std::ostringstream os;
  os << "stage " << stage_ << "\n";
  os << "l " << l_ << "\n";
  os << "base " << base_ << "\n";
  os << "depth " << depth_ << "\n";
  os << "mask ";
  for (uint8_t b : mask_) os << (b ? '1' : '0');
  os << "\n";
  return os.str();
}

StageFunction StageFunction::deserialize(std::istream& is) {
  StageFunction f;
  std::string key, bits;
  if (!(is >> key >> f.stage_) || key != "stage") throw std::invalid_argument("bad stage line");
  if (!(is >> key >> f.l_) || key != "l") throw std::invalid_argument("bad l line");
  if (!(is >> key >> f.base_) || key != "base") throw std::invalid_argument("bad base line");
  if (!(is >> key >> f.depth_) || key != "depth") throw std::invalid_argument("bad depth line");
  if (!(is >> key >> bits) || key != "mask") throw std::invalid_argument("bad mask line");
  size_t expect = f.l_ == 0 ? 1 : static_cast<size_t>(1) << (f.depth_ - f.base_);
  if (bits.size() != expect) throw std::invalid_argument("mask length mismatch");
  for (char c : bits) f.mask_.push_back(c == '1' ? 1 : 0);
  return f;
}

StageFunction apply_tower_stage(const StageFunction& f, int base, int depth,
                                long long l, const std::vector<uint8_t>& mask) {
  StageFunction g;
  g.stage_ = f.stage_ + 1;
  g.l_ = l;
  g.base_ = base;
  g.depth_ = depth;
  g.mask_ = mask;
  return g;
}

// --- tower update -------------------------------------------------------

StageFunction tower_update(const StageFunction& f, const FoelnerSequence& seq,
                           const Rat& alpha, const Rat& beta,
                           const BlockSequence& block, const TowerParams& p,
                           TowerReport& out) {
  if (!(p.delta > 0 && p.delta < 1)) throw std::invalid_argument("need 0 < delta < 1");
  if (!(p.eps > 0 && p.eps < std::min(Rat(p.delta / 100), Rat(1 - p.delta))))
    throw std::invalid_argument("need 0 < eps < min(delta/100, 1 - delta)");
  if (p.n_new < 1) throw std::invalid_argument("need a positive fluctuation target");
  if (f.l() != 0 && f.l() != block.l)
    throw std::invalid_argument("stage phase modulus must match the block family");
  out = TowerReport{};

  // window of the previous certification horizon
  Int L = 0;
  for (size_t n = 1; n <= p.horizon_prev; ++n)
    L = std::max(L, seq.at(n).runs().max());
  out.window = L;
  const Int max_a = block.maxima.back();

  // tower height: edge effects under eps/4 of the column
  int j = f.l() == 0 ? 6 : f.base_exponent();
  while (2 * block.l > (1ll << j)) ++j;
  while (!((Int(1) << j) * p.eps > 4 * (L + max_a))) ++j;
  if (f.l() != 0 && j < f.base_exponent()) j = f.base_exponent();
  out.height_exp = j;

  // dyadic sub-base: ~0.99*delta of the base, shortfall under delta/100
  int r = 1;
  Int selected = 0;
  for (;; ++r) {
    selected = rfloor(Rat(99, 100) * p.delta * (Int(1) << r));
    if (selected >= 1 &&
        Rat(99, 100) * p.delta - Rat(selected, Int(1) << r) < p.delta / 100)
      break;
    if (r > 64) throw std::logic_error("sub-base refinement failed to converge");
  }
  out.refine_exp = r;
  out.selected = selected;
  out.sub_base_target = Rat(99, 100) * p.delta;
  out.sub_base_measure = Rat(selected, Int(1) << r);
  out.sub_base_shortfall = out.sub_base_target - out.sub_base_measure;

  int depth_new = std::max(f.depth(), j + r);
  if (depth_new > p.depth_budget) {
    std::ostringstream msg;
    msg << "depth budget too small: need " << depth_new << ", have " << p.depth_budget;
    throw std::length_error(msg.str());
  }

  // evenly spread cylinder choice keeps every tower column representative
  const long long two_r = 1ll << r;
  const long long sel = selected.convert_to<long long>();
  std::vector<uint8_t> chosen(static_cast<size_t>(two_r), 0);
  for (long long s = 0; s < two_r; ++s)
    if ((s + 1) * sel / two_r > s * sel / two_r) chosen[static_cast<size_t>(s)] = 1;

  const int base = f.l() == 0 ? j : f.base_exponent();
  const size_t nchunk_new = static_cast<size_t>(1) << (depth_new - base);
  const size_t nchunk_old = f.mask().size();
  std::vector<uint8_t> mask_new(nchunk_new);
  for (size_t c = 0; c < nchunk_new; ++c) {
    long long s = static_cast<long long>(c >> (j - base)) % two_r;
    uint8_t keep = f.l() == 0 ? 0 : f.mask()[c % nchunk_old];
    mask_new[c] = chosen[static_cast<size_t>(s)] ? 1 : keep;
  }
  StageFunction g = apply_tower_stage(f, base, depth_new, block.l, mask_new);

  // conclusion: the update reaches the new fluctuation level
  out.mu_new = g.fluctuation_measure(seq, alpha, beta, p.horizon_new, {p.n_new})[0];
  out.reaches_new_level = out.mu_new > p.delta / 10;

  // conclusion: length-L observation windows rarely see a difference
  std::vector<size_t> changed;
  for (size_t c = 0; c < nchunk_new; ++c) {
    uint8_t old = f.l() == 0 ? 0 : f.mask()[c % nchunk_old];
    if (mask_new[c] && !old) changed.push_back(c);
  }
  if (changed.empty()) {
    out.disagreement = 0;
  } else {
    const Int chunk_len = Int(1) << base;
    const long long m = 2 * block.l;
    const Int period = Int(1) << depth_new;
    // zero gaps: length-l gaps inside a rewritten chunk, and the stretch
    // from a rewritten chunk's last one-run to the next rewritten chunk
    Int clean = 0;
    Int intra_gap = Int(block.l) - L + 1;
    if (intra_gap > 0)
      clean += Int(changed.size()) * (chunk_len / m - 1) * intra_gap;
    for (size_t i = 0; i < changed.size(); ++i) {
      size_t next = changed[(i + 1) % changed.size()];
      long long gap_chunks =
          static_cast<long long>((next + nchunk_new - changed[i]) % nchunk_new);
      if (gap_chunks == 0) gap_chunks = static_cast<long long>(nchunk_new);
      Int gap_len = Int(block.l) + Int(gap_chunks - 1) * chunk_len;
      if (gap_len - L + 1 > 0) clean += gap_len - L + 1;
    }
    out.disagreement = 1 - Rat(clean, period);
  }
  out.disagreement_bounded = out.disagreement <= p.delta;

  // conclusion: previously certified fluctuation mass is retained
  std::vector<long long> ns;
  for (long long n = 0; n <= p.n_upper; ++n) ns.push_back(n);
  out.mu_before = f.fluctuation_measure(seq, alpha, beta, p.horizon_prev, ns);
  out.mu_after = g.fluctuation_measure(seq, alpha, beta, p.horizon_new, ns);
  out.retention = true;
  for (size_t i = 0; i < ns.size(); ++i) {
    Rat need = std::min(Rat(out.mu_before[i] - p.eps), Rat(1, 10));
    out.retention = out.retention && out.mu_after[i] >= need;
  }

  // exact stand-in for the ergodic-density requirement on the base: every
  // tower column should carry close to its share of each certified set
  if (f.l() == 0 || f.depth() <= j) {
    out.base_cols = out.base_cols_ok = 1;
    out.base_density = true;
  } else {
    size_t cols = static_cast<size_t>(1) << (f.depth() - j);
    size_t chunks_per_col = static_cast<size_t>(1) << (j - f.base_exponent());
    std::vector<char> ok(cols, 1);
    for (long long n = 1; n <= p.n_upper; ++n) {
      std::vector<Int> prof = f.chunk_profile(seq, alpha, beta, p.horizon_prev, n);
      Rat mu = out.mu_before[static_cast<size_t>(n)];
      for (size_t col = 0; col < cols; ++col) {
        Int cnt = 0;
        for (size_t c = 0; c < chunks_per_col; ++c) cnt += prof[col * chunks_per_col + c];
        if (!(Rat(cnt) > (mu - p.eps / 4) * (Int(1) << j))) ok[col] = 0;
      }
    }
    out.base_cols = cols;
    for (char c : ok) out.base_cols_ok += c;
    out.base_density = Rat(out.base_cols_ok, cols) > 1 - p.eps / 4;
  }
  return g;
}

// --- staged construction ------------------------------------------------

namespace {

long long decay_target(const std::function<Rat(long long)>& omega, size_t k) {
  const Rat bound = Rat(1, 10) / (Int(1) << (k + 1));
  for (long long n = 1; n <= 256; ++n)
    if (omega(n) < bound) return n;
  throw std::invalid_argument("decay schedule does not reach the stage threshold");
}

}  // namespace

CounterexampleReport run_counterexample(const CounterexampleParams& p) {
  if (!p.omega) throw std::invalid_argument("decay schedule required");
  if (p.stages < 1) throw std::invalid_argument("need at least one stage");
  CounterexampleReport rep;
  rep.alpha = block_gap_low(p.lambda);
  rep.beta = block_gap_high(p.lambda);
  BlockSequence block = build_block_sequence(p.lambda, p.l0, p.pairs);
  FoelnerSequence seq = build_concatenated_foelner(p.lambda, p.l0, p.pairs, 1);
  const size_t horizon = std::min(p.horizon, seq.horizon());
  const long long cap = std::min<long long>(p.pairs, static_cast<long long>(horizon / 2));

  StageFunction f = StageFunction::zero();
  Rat tol = 0;
  rep.pass = true;
  for (size_t k = 1; k <= p.stages; ++k) {
    Rat delta(1, Int(1) << k);
    StageRecord rec;
    rec.stage = k;
    rec.n_target_raw = decay_target(p.omega, k);
    rec.n_target = std::min(rec.n_target_raw, cap);
    rec.capped = rec.n_target < rec.n_target_raw;
    long long n_upper = k == 1 ? std::min(decay_target(p.omega, 0), cap)
                               : rep.records.back().n_target;

    // eps: dyadic, below delta/100, leaving every certified margin intact
    int e = static_cast<int>(k) + 7;
    for (auto& r : rep.records)
      while (!(r.mu_exact - Rat(1, Int(1) << e) > r.bound) && e < 60) ++e;
    Rat eps(1, Int(1) << e);

    TowerParams tp;
    tp.eps = eps;
    tp.delta = delta;
    tp.horizon_prev = k == 1 ? 1 : horizon;
    tp.horizon_new = horizon;
    tp.n_upper = n_upper;
    tp.n_new = rec.n_target;
    tp.depth_budget = p.depth_budget;
    f = tower_update(f, seq, rep.alpha, rep.beta, block, tp, rec.tower);

    tol += rec.tower.sub_base_shortfall / 9;
    rec.mu_exact = rec.tower.mu_new;
    rec.bound = delta / 10;
    rec.tolerance = tol;
    rep.pass = rep.pass && rec.tower.reaches_new_level &&
               rec.tower.disagreement_bounded && rec.tower.retention;
    rep.records.push_back(std::move(rec));
  }

  // final decay check against the last stage function
  for (auto& rec : rep.records) {
    rec.mu_exact =
        f.fluctuation_measure(seq, rep.alpha, rep.beta, horizon, {rec.n_target})[0];
    rec.tolerance = tol;
    rep.pass = rep.pass && rec.mu_exact > rec.bound - tol;
  }
  rep.f = std::move(f);
  return rep;
}

std::string CounterexampleReport::csv() const {
  std::ostringstream os;
  os << "stage,N_raw,N_used,capped,mu,bound,tolerance\n";
  for (auto& r : records)
    os << r.stage << "," << r.n_target_raw << "," << r.n_target << ","
       << (r.capped ? 1 : 0) << "," << r.mu_exact << "," << r.bound << ","
       << r.tolerance << "\n";
  return os.str();
}

}  // namespace ergolab
