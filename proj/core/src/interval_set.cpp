#include "ergolab/interval_set.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ergolab {

IntervalSet IntervalSet::interval(const Int& lo, const Int& hi) {
  IntervalSet s;
  if (lo <= hi) s.runs_.push_back({lo, hi});
  return s;
}

IntervalSet IntervalSet::from_runs(std::vector<Run> rs) {
  std::erase_if(rs, [](const Run& r) { return r.lo > r.hi; });
  std::sort(rs.begin(), rs.end(),
            [](const Run& a, const Run& b) { return a.lo < b.lo; });
  IntervalSet s;
  for (auto& r : rs) {
    if (!s.runs_.empty() && r.lo <= s.runs_.back().hi + 1) {
      if (r.hi > s.runs_.back().hi) s.runs_.back().hi = r.hi;
    } else {
      s.runs_.push_back(r);
    }
  }
  return s;
}

IntervalSet IntervalSet::from_values(std::vector<Int> vs) {
  std::vector<Run> rs;
  rs.reserve(vs.size());
  for (auto& v : vs) rs.push_back({v, v});
  return from_runs(std::move(rs));
}

Int IntervalSet::cardinality() const {
  Int n = 0;
  for (auto& r : runs_) n += r.length();
  return n;
}

bool IntervalSet::contains(const Int& v) const {
  auto it = std::upper_bound(
      runs_.begin(), runs_.end(), v,
      [](const Int& x, const Run& r) { return x < r.lo; });
  if (it == runs_.begin()) return false;
  --it;
  return v <= it->hi;
}

Int IntervalSet::max_internal_gap() const {
  Int g = 0;
  for (size_t i = 1; i < runs_.size(); ++i)
    g = std::max(g, Int(runs_[i].lo - runs_[i - 1].hi - 1));
  return g;
}

IntervalSet IntervalSet::unite(const IntervalSet& o) const {
  std::vector<Run> rs = runs_;
  rs.insert(rs.end(), o.runs_.begin(), o.runs_.end());
  return from_runs(std::move(rs));
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
  IntervalSet s;
  size_t i = 0, j = 0;
  while (i < runs_.size() && j < o.runs_.size()) {
    Int lo = std::max(runs_[i].lo, o.runs_[j].lo);
    Int hi = std::min(runs_[i].hi, o.runs_[j].hi);
    if (lo <= hi) s.runs_.push_back({lo, hi});
    if (runs_[i].hi < o.runs_[j].hi) ++i; else ++j;
  }
  return s;
}

IntervalSet IntervalSet::difference(const IntervalSet& o) const {
  IntervalSet s;
  size_t j = 0;
  for (auto r : runs_) {
    Int cur = r.lo;
    while (j < o.runs_.size() && o.runs_[j].hi < cur) ++j;
    size_t k = j;
    while (cur <= r.hi) {
      if (k >= o.runs_.size() || o.runs_[k].lo > r.hi) {
        s.runs_.push_back({cur, r.hi});
        break;
      }
      if (o.runs_[k].lo > cur) s.runs_.push_back({cur, o.runs_[k].lo - 1});
      cur = o.runs_[k].hi + 1;
      ++k;
    }
  }
  return s;
}

IntervalSet IntervalSet::translate(const Int& d) const {
  IntervalSet s = *this;
  for (auto& r : s.runs_) { r.lo += d; r.hi += d; }
  return s;
}

IntervalSet IntervalSet::negate() const {
  IntervalSet s;
  s.runs_.reserve(runs_.size());
  for (auto it = runs_.rbegin(); it != runs_.rend(); ++it)
    s.runs_.push_back({-it->hi, -it->lo});
  return s;
}

namespace {

// interval map lo -> hi with merge-on-insert; used as the accumulator of the
// output-sensitive Minkowski sum
class RunBuilder {
 public:
  void insert(Int lo, Int hi) {
    auto it = m_.upper_bound(lo);
    if (it != m_.begin()) {
      auto prev = std::prev(it);
      if (prev->second + 1 >= lo) { lo = prev->first; hi = std::max(hi, prev->second); it = prev; }
    }
    while (it != m_.end() && it->first <= hi + 1) {
      hi = std::max(hi, it->second);
      it = m_.erase(it);
    }
    m_.emplace(std::move(lo), std::move(hi));
  }
  // true if [lo,hi] already fully covered
  bool covered(const Int& lo, const Int& hi) const {
    auto it = m_.upper_bound(lo);
    if (it == m_.begin()) return false;
    --it;
    return it->second >= hi;
  }
  // uncovered subranges of [lo,hi]
  std::vector<Run> gaps(const Int& lo, const Int& hi) const {
    std::vector<Run> out;
    Int cur = lo;
    auto it = m_.upper_bound(lo);
    if (it != m_.begin()) {
      auto prev = std::prev(it);
      if (prev->second >= cur) cur = prev->second + 1;
    }
    while (cur <= hi) {
      if (it == m_.end() || it->first > hi) { out.push_back({cur, hi}); break; }
      if (it->first > cur) out.push_back({cur, it->first - 1});
      cur = it->second + 1;
      ++it;
    }
    return out;
  }
  IntervalSet take() const {
    IntervalSet s;
    std::vector<Run> rs;
    rs.reserve(m_.size());
    for (auto& [lo, hi] : m_) rs.push_back({lo, hi});
    return IntervalSet::from_runs(std::move(rs));
  }

 private:
  std::map<Int, Int> m_;
};

// maximal group of equally long runs at a fixed spacing; count 1 = lone run
struct Prog {
  Int start, len, count, step;
};

std::vector<Prog> compress_runs(const std::vector<Run>& runs) {
  std::vector<Prog> out;
  size_t i = 0;
  while (i < runs.size()) {
    Prog p{runs[i].lo, runs[i].length(), 1, 0};
    if (i + 1 < runs.size() && runs[i + 1].length() == p.len) {
      Int step = runs[i + 1].lo - runs[i].lo;
      size_t j = i + 1;
      while (j < runs.size() && runs[j].length() == p.len &&
             runs[j].lo - runs[j - 1].lo == step)
        ++j;
      if (j - i >= 3) {  // compress only when it actually pays
        p.count = Int(j - i);
        p.step = step;
        out.push_back(p);
        i = j;
        continue;
      }
    }
    out.push_back(p);
    ++i;
  }
  return out;
}

// runs a progression materializes into after gap collapse
Int prog_runs(const Int& len, const Int& count, const Int& step) {
  if (count <= 1 || len >= step) return 1;
  return count;
}

void materialize_prog(const Prog& p, std::vector<Run>& out) {
  if (p.count <= 1) {
    out.push_back({p.start, p.start + p.len - 1});
  } else if (p.len >= p.step) {
    out.push_back({p.start, p.start + (p.count - 1) * p.step + p.len - 1});
  } else {
    for (Int i = 0; i < p.count; ++i)
      out.push_back({p.start + i * p.step, p.start + i * p.step + p.len - 1});
  }
}

}  // namespace

IntervalSet IntervalSet::minkowski_sum(const IntervalSet& o) const {
  if (empty() || o.empty()) return {};
  // Fast path: both sides compress into few arithmetic progressions of runs
  // (the shape of the block-construction sets). A pair of progressions with a
  // common spacing sums to a single progression, so the cost is governed by
  // the run count of the result rather than the product of the inputs.
  {
    auto pa = compress_runs(runs_), pb = compress_runs(o.runs_);
    const Int cap = Int(1) << 21;
    Int est = 0;
    bool feasible = pa.size() * pb.size() <= 4096;
    if (feasible) {
      for (const Prog& p : pa) {
        for (const Prog& q : pb) {
          Int len = p.len + q.len - 1;
          if (p.count <= 1)
            est += prog_runs(len, q.count, q.step);
          else if (q.count <= 1 || p.step == q.step)
            est += prog_runs(len, p.count + q.count - 1, p.step);
          else if (p.count <= q.count)
            est += p.count * prog_runs(len, q.count, q.step);
          else
            est += q.count * prog_runs(len, p.count, p.step);
          if (est > cap) { feasible = false; break; }
        }
        if (!feasible) break;
      }
    }
    if (feasible) {
      std::vector<Run> rs;
      rs.reserve(est.convert_to<size_t>());
      for (const Prog& p : pa) {
        for (const Prog& q : pb) {
          Int len = p.len + q.len - 1;
          Int start = p.start + q.start;
          if (p.count <= 1)
            materialize_prog({start, len, q.count, q.step}, rs);
          else if (q.count <= 1 || p.step == q.step)
            materialize_prog({start, len, p.count + q.count - 1, p.step}, rs);
          else {
            const Prog& small = p.count <= q.count ? p : q;
            const Prog& big = p.count <= q.count ? q : p;
            for (Int i = 0; i < small.count; ++i)
              materialize_prog({start + i * small.step, len, big.count, big.step}, rs);
          }
        }
      }
      return from_runs(std::move(rs));
    }
  }
  // iterate over the side with fewer runs
  const IntervalSet& a = run_count() <= o.run_count() ? *this : o;
  const IntervalSet& b = run_count() <= o.run_count() ? o : *this;
  const Int bgap = b.max_internal_gap();
  const Int bmin = b.min(), bmax = b.max();
  RunBuilder acc;
  for (const Run& ar : a.runs_) {
    Int span_lo = ar.lo + bmin, span_hi = ar.hi + bmax;
    // a run long enough to bridge every gap of b collapses the sum to one run
    if (ar.length() - 1 >= bgap) { acc.insert(span_lo, span_hi); continue; }
    if (acc.covered(span_lo, span_hi)) continue;
    for (const Run& g : acc.gaps(span_lo, span_hi)) {
      // b-runs whose sum with ar touches [g.lo, g.hi]
      Int blo_min = g.lo - ar.hi;  // need br.hi >= blo_min
      Int blo_max = g.hi - ar.lo;  // need br.lo <= blo_max
      auto it = std::lower_bound(
          b.runs_.begin(), b.runs_.end(), blo_min,
          [](const Run& r, const Int& x) { return r.hi < x; });
      for (; it != b.runs_.end() && it->lo <= blo_max; ++it)
        acc.insert(ar.lo + it->lo, ar.hi + it->hi);
    }
  }
  return acc.take();
}

IntervalSet IntervalSet::take_first(const Int& k) const {
  if (k <= 0) return {};
  std::vector<Run> out;
  Int left = k;
  for (const Run& r : runs_) {
    if (left >= r.length()) {
      out.push_back(r);
      left -= r.length();
      if (left == 0) break;
    } else {
      out.push_back({r.lo, r.lo + left - 1});
      break;
    }
  }
  IntervalSet s;
  s.runs_ = std::move(out);
  return s;
}

Int IntervalSet::intersection_size(const IntervalSet& o) const {
  Int n = 0;
  size_t i = 0, j = 0;
  while (i < runs_.size() && j < o.runs_.size()) {
    Int lo = std::max(runs_[i].lo, o.runs_[j].lo);
    Int hi = std::min(runs_[i].hi, o.runs_[j].hi);
    if (lo <= hi) n += hi - lo + 1;
    if (runs_[i].hi < o.runs_[j].hi) ++i; else ++j;
  }
  return n;
}

Int IntervalSet::symdiff_size(const IntervalSet& o) const {
  return cardinality() + o.cardinality() - 2 * intersection_size(o);
}

std::vector<Int> IntervalSet::elements(size_t limit) const {
  if (cardinality() > limit)
    throw std::runtime_error("IntervalSet::elements: set too large to enumerate");
  std::vector<Int> out;
  for (auto& r : runs_)
    for (Int v = r.lo; v <= r.hi; ++v) out.push_back(v);
  return out;
}

std::string IntervalSet::to_text() const {
  std::ostringstream os;
  bool first = true;
  for (auto& r : runs_) {
    if (!first) os << ' ';
    first = false;
    if (r.lo == r.hi) os << r.lo;
    else os << r.lo << ".." << r.hi;
  }
  return os.str();
}

IntervalSet IntervalSet::parse(const std::string& line) {
  std::vector<Run> rs;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    auto pos = tok.find("..", 1);  // start at 1: leading '-' is a sign
    if (pos == std::string::npos) {
      Int v(tok);
      rs.push_back({v, v});
    } else {
      rs.push_back({Int(tok.substr(0, pos)), Int(tok.substr(pos + 2))});
    }
  }
  return from_runs(std::move(rs));
}

}  // namespace ergolab
