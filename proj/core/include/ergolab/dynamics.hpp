#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ergolab/covering.hpp"
#include "ergolab/foelner.hpp"

namespace ergolab {

// Measure-preserving Z-systems with a bounded observable; every observable
// used here takes rational values, so averages stay exact wherever the
// underlying point arithmetic is exact (cyclic, odometer, bernoulli).
class SampleableSystem {
 public:
  enum class Kind { FiniteCyclic, IrrationalRotation, BernoulliShift, DyadicOdometer };

  struct Point {
    long long index = 0;   // cyclic / odometer level
    double angle = 0;      // rotation
    uint64_t key = 0;      // bernoulli configuration key
  };

  // f given as a label table over the m points
  static SampleableSystem finite_cyclic(long long m, std::vector<Rat> f);
  // f = indicator of [0, 1/2); theta irrational, passed as double
  static SampleableSystem irrational_rotation(double theta);
  // f = symbol at the origin; iid fair bits keyed by (system seed, coordinate)
  static SampleableSystem bernoulli_shift(uint64_t seed);
  // f depends on the first `depth` binary digits: label table over 2^depth levels
  static SampleableSystem dyadic_odometer(int depth, std::vector<Rat> labels);

  Kind kind() const { return kind_; }
  long long period() const { return period_; }  // 0 when aperiodic
  const Rat& bound() const { return bound_; }   // S, with |f| <= S everywhere
  const std::vector<Rat>& labels() const { return labels_; }

  // prefix[i] = sum of the first i labels; built once, shared by every average
  const std::vector<Rat>& label_prefix() const;

  Point sample(uint64_t seed) const;
  Point act(const Point& x, const Int& g) const;  // T_g x
  Rat observe(const Point& x) const;              // f(x)
  Rat observe_shifted(const Point& x, const Int& g) const { return observe(act(x, g)); }

 private:
  Kind kind_ = Kind::FiniteCyclic;
  long long period_ = 1;       // cyclic m or 2^depth; 0 for rotation/bernoulli
  double theta_ = 0;
  uint64_t seed_ = 0;
  std::vector<Rat> labels_;
  mutable std::vector<Rat> prefix_;
  Rat bound_ = 1;
};

struct FluctuationQuery {
  Rat alpha, beta;  // gap, alpha < beta
  size_t n_fluct = 0;
  size_t horizon = 1;  // M
};

struct EstimateReport {
  double estimate = 0;
  size_t samples = 0;
  double ci_low = 0, ci_high = 1;  // Wilson, 95%
  uint64_t seed = 0;
  bool exact = false;
};

// (1/|F|) sum_{g in F} f(T_g x); closed form via prefix sums for label-table
// systems with run-list F, elementwise otherwise
Rat ergodic_average(const SampleableSystem& sys, const SampleableSystem::Point& x,
                    const FiniteSubset& F);

// maximal N admitting n_1<...<n_{2N} with values[n_odd] <= alpha,
// values[n_even] >= beta; greedy two-state scan
size_t count_fluctuations(const std::vector<Rat>& values, const Rat& alpha, const Rat& beta);

std::vector<Rat> average_trajectory(const SampleableSystem& sys,
                                    const SampleableSystem::Point& x,
                                    const FoelnerSequence& seq, size_t horizon);

EstimateReport estimate_mu_DN(const SampleableSystem& sys, const FoelnerSequence& seq,
                              const FluctuationQuery& query, size_t samples, uint64_t seed);

// exact fraction of points in D_{N,M}; cyclic and odometer systems only
Rat exact_mu_DN(const SampleableSystem& sys, const FoelnerSequence& seq,
                const FluctuationQuery& query);

// up/down crossing scale lists for each center's orbit point, feeding the
// covering growth step: up = {n <= M : A_n f(cx) >= beta}, down likewise <= alpha
OrbitData collect_crossings(const SampleableSystem& sys, const FoelnerSequence& seq,
                            const std::vector<GroupElement>& centers,
                            const SampleableSystem::Point& x, const Rat& alpha,
                            const Rat& beta, size_t horizon);

struct BoundConstants {
  Rat delta, eps, lambda;
  Int q;
  double c0 = 0;  // (1+delta/2)^{-1/(2q)}
  Rat c1;         // (1+delta/2)^3
};

// Explicit constants for the fluctuation bound mu(D_N) <= c1 c0^N, derived
// from the gap (alpha, beta) and the observable bound S (S >= beta assumed,
// i.e. after shifting f to be nonnegative). eps comes from a dyadic grid.
std::optional<BoundConstants> theorem_bound(const Rat& alpha, const Rat& beta, const Rat& S);

// general form: shifts (alpha, beta, ||f||_inf) to the nonnegative regime
// (alpha + S, beta + S, 2S) first
std::optional<BoundConstants> theorem_bound_shifted(const Rat& alpha, const Rat& beta,
                                                    const Rat& sup_norm);

// deterministic splittable counter stream used for per-sample seeds
uint64_t mix_seed(uint64_t seed, uint64_t counter);

}  // namespace ergolab
