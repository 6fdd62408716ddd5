#include "ergolab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ergolab {

namespace {

uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double unit_double(uint64_t z) { return double(z >> 11) * 0x1.0p-53; }

// floored remainder into [0, m)
long long fmod_ll(long long v, long long m) {
  long long r = v % m;
  return r < 0 ? r + m : r;
}

}  // namespace

uint64_t mix_seed(uint64_t seed, uint64_t counter) {
  return splitmix64(seed ^ splitmix64(counter));
}

SampleableSystem SampleableSystem::finite_cyclic(long long m, std::vector<Rat> f) {
  if (m < 1 || Int(f.size()) != m) throw std::invalid_argument("label table must have m entries");
  SampleableSystem s;
  s.kind_ = Kind::FiniteCyclic;
  s.period_ = m;
  s.labels_ = std::move(f);
  s.bound_ = 0;
  for (auto& v : s.labels_) s.bound_ = std::max(s.bound_, Rat(abs(numerator(v)), denominator(v)));
  if (s.bound_ == 0) s.bound_ = 1;
  return s;
}

SampleableSystem SampleableSystem::irrational_rotation(double theta) {
  SampleableSystem s;
  s.kind_ = Kind::IrrationalRotation;
  s.period_ = 0;
  s.theta_ = theta - std::floor(theta);
  s.bound_ = 1;
  return s;
}

SampleableSystem SampleableSystem::bernoulli_shift(uint64_t seed) {
  SampleableSystem s;
  s.kind_ = Kind::BernoulliShift;
  s.period_ = 0;
  s.seed_ = seed;
  s.bound_ = 1;
  return s;
}

SampleableSystem SampleableSystem::dyadic_odometer(int depth, std::vector<Rat> labels) {
  if (depth < 1 || depth > 30) throw std::invalid_argument("odometer depth in [1,30]");
  long long h = 1ll << depth;
  if (Int(labels.size()) != h) throw std::invalid_argument("need one label per tower level");
  SampleableSystem s;
  s.kind_ = Kind::DyadicOdometer;
  s.period_ = h;
  s.labels_ = std::move(labels);
  s.bound_ = 0;
  for (auto& v : s.labels_) s.bound_ = std::max(s.bound_, Rat(abs(numerator(v)), denominator(v)));
  if (s.bound_ == 0) s.bound_ = 1;
  return s;
}

const std::vector<Rat>& SampleableSystem::label_prefix() const {
  if (prefix_.empty()) {
    prefix_.resize(labels_.size() + 1);
    for (size_t i = 0; i < labels_.size(); ++i) prefix_[i + 1] = prefix_[i] + labels_[i];
  }
  return prefix_;
}

SampleableSystem::Point SampleableSystem::sample(uint64_t seed) const {
  Point p;
  uint64_t z = splitmix64(seed);
  switch (kind_) {
    case Kind::FiniteCyclic:
    case Kind::DyadicOdometer:
      p.index = static_cast<long long>(z % static_cast<uint64_t>(period_));
      break;
    case Kind::IrrationalRotation:
      p.angle = unit_double(z);
      break;
    case Kind::BernoulliShift:
      p.key = z;
      break;
  }
  return p;
}

SampleableSystem::Point SampleableSystem::act(const Point& x, const Int& g) const {
  long long n = g.convert_to<long long>();
  Point p = x;
  switch (kind_) {
    case Kind::FiniteCyclic:
    case Kind::DyadicOdometer:
      // the odometer's +1 map permutes the first `depth` digits cyclically,
      // so on level-labeled observables it is rotation of the tower
      p.index = fmod_ll(x.index + n, period_);
      break;
    case Kind::IrrationalRotation: {
      double a = x.angle + double(n) * theta_;
      p.angle = a - std::floor(a);
      break;
    }
    case Kind::BernoulliShift:
      // shift the configuration: fold the displacement into the key offset
      p.key = x.key;
      p.index = x.index + n;
      break;
  }
  return p;
}

Rat SampleableSystem::observe(const Point& x) const {
  switch (kind_) {
    case Kind::FiniteCyclic:
    case Kind::DyadicOdometer:
      return labels_[static_cast<size_t>(x.index)];
    case Kind::IrrationalRotation:
      return x.angle < 0.5 ? 1 : 0;
    case Kind::BernoulliShift:
      return splitmix64(seed_ ^ splitmix64(x.key ^ splitmix64(
                 static_cast<uint64_t>(x.index)))) & 1u;
  }
  return 0;
}

Rat ergodic_average(const SampleableSystem& sys, const SampleableSystem::Point& x,
                    const FiniteSubset& F) {
  if (F.empty()) throw std::invalid_argument("empty averaging set");
  const Int card = F.cardinality();
  Rat sum = 0;
  if ((sys.kind() == SampleableSystem::Kind::FiniteCyclic ||
       sys.kind() == SampleableSystem::Kind::DyadicOdometer) &&
      F.has_runs()) {
    // prefix-sum closed form over runs: labels are m-periodic along the orbit
    const long long m = sys.period();
    const auto& prefix = sys.label_prefix();
    const Rat total = prefix[m];
    auto cum = [&](const Int& t) -> Rat {  // sum_{u=0}^{t-1} lab[u mod m]
      Int qq = t >= 0 ? Int(t / m) : Int(-((-t + m - 1) / m));
      Int r = t - qq * m;
      return Rat(qq) * total + prefix[r.convert_to<long long>()];
    };
    for (const Run& run : F.runs().runs()) {
      Int lo = run.lo + x.index, hi = run.hi + x.index;
      sum += cum(hi + 1) - cum(lo);
    }
  } else {
    if (F.has_runs()) {
      for (const Run& run : F.runs().runs())
        for (Int g = run.lo; g <= run.hi; ++g) sum += sys.observe_shifted(x, g);
    } else {
      for (const auto& g : F.elements()) sum += sys.observe_shifted(x, g.c[0]);
    }
  }
  return sum / Rat(card);
}

size_t count_fluctuations(const std::vector<Rat>& values, const Rat& alpha, const Rat& beta) {
  if (!(alpha < beta)) throw std::invalid_argument("alpha < beta required");
  size_t n = 0;
  bool seeking_low = true;
  for (const Rat& v : values) {
    if (seeking_low) {
      if (v <= alpha) seeking_low = false;
    } else if (v >= beta) {
      seeking_low = true;
      ++n;
    }
  }
  return n;
}

std::vector<Rat> average_trajectory(const SampleableSystem& sys,
                                    const SampleableSystem::Point& x,
                                    const FoelnerSequence& seq, size_t horizon) {
  std::vector<Rat> out;
  out.reserve(horizon);
  for (size_t n = 1; n <= horizon; ++n) out.push_back(ergodic_average(sys, x, seq.at(n)));
  return out;
}

namespace {

void wilson(EstimateReport& rep, size_t hits) {
  const double z = 1.959963985;
  double n = double(rep.samples), p = double(hits) / n;
  rep.estimate = p;
  double z2 = z * z;
  double denom = 1 + z2 / n;
  double center = (p + z2 / (2 * n)) / denom;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  rep.ci_low = std::max(0.0, center - half);
  rep.ci_high = std::min(1.0, center + half);
}

}  // namespace

EstimateReport estimate_mu_DN(const SampleableSystem& sys, const FoelnerSequence& seq,
                              const FluctuationQuery& query, size_t samples, uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples >= 1 required");
  if (query.horizon > seq.horizon()) throw std::out_of_range("query horizon beyond sequence");
  size_t hits = 0;
  for (size_t i = 0; i < samples; ++i) {
    auto x = sys.sample(mix_seed(seed, i));
    auto traj = average_trajectory(sys, x, seq, query.horizon);
    if (count_fluctuations(traj, query.alpha, query.beta) >= query.n_fluct) ++hits;
  }
  EstimateReport rep;
  rep.samples = samples;
  rep.seed = seed;
  wilson(rep, hits);
  return rep;
}

Rat exact_mu_DN(const SampleableSystem& sys, const FoelnerSequence& seq,
                const FluctuationQuery& query) {
  if (sys.kind() != SampleableSystem::Kind::FiniteCyclic &&
      sys.kind() != SampleableSystem::Kind::DyadicOdometer)
    throw std::invalid_argument("exact enumeration needs a cyclic or odometer system");
  if (query.horizon > seq.horizon()) throw std::out_of_range("query horizon beyond sequence");
  const long long m = sys.period();
  Int hits = 0;
  for (long long i = 0; i < m; ++i) {
    SampleableSystem::Point x;
    x.index = i;
    auto traj = average_trajectory(sys, x, seq, query.horizon);
    if (count_fluctuations(traj, query.alpha, query.beta) >= query.n_fluct) ++hits;
  }
  return Rat(hits, m);
}

OrbitData collect_crossings(const SampleableSystem& sys, const FoelnerSequence& seq,
                            const std::vector<GroupElement>& centers,
                            const SampleableSystem::Point& x, const Rat& alpha,
                            const Rat& beta, size_t horizon) {
  OrbitData od;
  for (const auto& c : centers) {
    auto cx = sys.act(x, c.c[0]);
    auto traj = average_trajectory(sys, cx, seq, horizon);
    std::vector<size_t> up, down;
    for (size_t n = 1; n <= horizon; ++n) {
      if (traj[n - 1] >= beta) up.push_back(n);
      if (traj[n - 1] <= alpha) down.push_back(n);
    }
    od.centers.push_back(c);
    od.up_scales.push_back(std::move(up));
    od.down_scales.push_back(std::move(down));
  }
  return od;
}

std::optional<BoundConstants> theorem_bound(const Rat& alpha, const Rat& beta, const Rat& S) {
  if (!(0 < alpha && alpha < beta && S >= beta))
    throw std::invalid_argument("need 0 < alpha < beta <= S");
  BoundConstants bc;
  bc.delta = std::min(Rat((beta / alpha - 1) / 2), Rat(1, 2));
  // largest dyadic eps < 1/4 meeting the three gating inequalities
  Rat eps(1, 8);
  bool found = false;
  for (int k = 0; k < 64; ++k, eps /= 2) {
    if ((beta - 4 * eps * S) * (1 - eps) / alpha >= 1 + bc.delta &&
        (1 - eps) * (1 + bc.delta) >= 1 + bc.delta / 2 &&
        (1 - eps) * (1 + bc.delta / 2) >= 1) {
      found = true;
      break;
    }
  }
  if (!found) return std::nullopt;
  bc.eps = eps;
  // the covering proposition is invoked at eps/2, tightening q and lambda
  Rat eps2 = eps * eps;
  bc.q = ceil_div(Int(80 * denominator(eps2)), Int(numerator(eps2)));
  bc.lambda = eps / 16;
  bc.c1 = (1 + bc.delta / 2) * (1 + bc.delta / 2) * (1 + bc.delta / 2);
  bc.c0 = std::exp(-std::log(1 + to_double(bc.delta) / 2) / (2 * to_double(Rat(bc.q))));
  return bc;
}

std::optional<BoundConstants> theorem_bound_shifted(const Rat& alpha, const Rat& beta,
                                                    const Rat& sup_norm) {
  if (!(alpha < beta && sup_norm > 0)) throw std::invalid_argument("need alpha < beta, S > 0");
  return theorem_bound(alpha + sup_norm, beta + sup_norm, 2 * sup_norm);
}

}  // namespace ergolab
