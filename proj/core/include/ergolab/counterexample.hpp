#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ergolab/foelner.hpp"
#include "ergolab/interval_set.hpp"

namespace ergolab {

// square-wave indicator: 1 iff t mod 2l lands in [0, l-1]; defined for t >= 0
int phase_indicator(long long l, const Int& t);

// Subset of Z stored as disjoint segments, each an interval [lo, hi]
// restricted to a set of residues mod a fixed modulus. The block sets are
// unions of a solid prefix and one residue band, and every operation the
// certification needs (union, shift, symmetric difference, Minkowski sum)
// keeps that shape, so cardinalities of 1e10-element sets stay exact and
// cheap. Minkowski sums are exact: the banded product form is provably
// correct away from segment ends, and a brute-force zone of width one
// modulus patches each end.
class BandSet {
 public:
  struct Segment {
    Int lo, hi;                   // inclusive
    std::vector<uint64_t> mask;   // modulus bits; bit r = residue r allowed
  };

  explicit BandSet(long long modulus) : m_(modulus) {}
  static BandSet interval(long long modulus, const Int& lo, const Int& hi);
  // residues [r1, r2] (no wrap) over [lo, hi]
  static BandSet band(long long modulus, const Int& lo, const Int& hi, long long r1,
                      long long r2);

  long long modulus() const { return m_; }
  bool empty() const { return segs_.empty(); }
  const std::vector<Segment>& segments() const { return segs_; }
  Int cardinality() const;
  Int max() const;
  Int min() const;

  BandSet unite(const BandSet& o) const;
  BandSet translate(const Int& d) const;
  BandSet negate() const;
  BandSet minkowski_sum(const BandSet& o) const;
  Int symdiff_size(const BandSet& o) const;

  // elements z with (z + shift) mod modulus in [0, modulus/2 - 1]
  Int phase_count(const Int& shift) const;

  IntervalSet to_interval_set(size_t run_cap = 1u << 22) const;

 private:
  long long m_;
  std::vector<Segment> segs_;  // sorted, disjoint, nonempty masks
  friend BandSet normalize_segments(long long, std::vector<Segment>);
};

// The recursive fluctuation blocks: A_{n+1} alternates between a solid
// prefix [0, 2M_n/c] plus an in-phase residue band (odd n+1) and the same
// prefix plus the opposite-phase band (even n+1), M_0 = l^2, M_n = max(A_n).
struct BlockSequence {
  Rat lambda;
  long long l = 0;
  long long pairs = 0;             // number of fluctuation pairs N
  std::vector<BandSet> sets;       // A_1 .. A_2N
  std::vector<Int> maxima;         // M_0 .. M_2N
  IntervalSet runs(size_t n, size_t run_cap = 1u << 22) const;  // 1-based
};

BlockSequence build_block_sequence(const Rat& lambda, long long l, long long pairs);

// exact left-tempered ratios of (A_n); pass iff all <= 1 + lambda
struct BlockTemperedCheck {
  std::vector<Rat> ratios;
  bool pass = false;
};
BlockTemperedCheck verify_property_a(const BlockSequence& b);

// shift-invariance: max over |b| <= sqrt(l), n of |A_n ^ (A_n+b)| / |A_n|,
// pass iff <= 2/sqrt(l)
struct BlockInvarianceCheck {
  Rat max_ratio;
  bool pass = false;
};
BlockInvarianceCheck verify_property_b(const BlockSequence& b);

// exact averages of the shifted square wave along A_1..A_2N; the averages
// start high (odd n) and alternate, so the certificate counts downward
// crossings of the gap (alpha, beta)
struct BlockFluctuationCheck {
  std::vector<Rat> averages;
  Rat alpha, beta;
  size_t downward_crossings = 0;
  // true when the closed-form bounds alone separate the gap (needs
  // l * lambda > 80(4 + lambda)); smaller l can still pass via the exact
  // averages, which is what `pass` certifies
  bool bound_separated = false;
  bool pass = false;
};
BlockFluctuationCheck verify_property_c(const BlockSequence& b, long long offset,
                                        long long shift);

Rat block_gap_low(const Rat& lambda);    // 1/2 - lambda/(5(4+lambda))
Rat block_gap_high(const Rat& lambda);   // 1/2 + lambda/(5(4+lambda))

// concatenation of block families with l advancing to the previous family's
// maximum; desk mode decouples the per-family pair count from l (the faithful
// rule pairs = l explodes past any enumerable scale and requires l0 > 100)
FoelnerSequence build_concatenated_foelner(const Rat& lambda, long long l0,
                                           long long pairs, size_t stages,
                                           bool desk = true);

// Tower-level-labeled observable on the dyadic odometer, built stage by
// stage. Every stage overwrites the levels above a sparse sub-base with the
// square wave, so the function is always  phase(t mod 2l)  AND  a block mask
// on aligned 2^base chunks of the level index; the mask is the whole state.
class StageFunction {
 public:
  static StageFunction zero();

  int stage() const { return stage_; }
  long long l() const { return l_; }
  int base_exponent() const { return base_; }   // chunk size 2^base
  int depth() const { return depth_; }          // period 2^depth
  Int period() const { return Int(1) << depth_; }
  const std::vector<uint8_t>& mask() const { return mask_; }

  int value(const Int& level) const;  // f at a tower level, in {0,1}

  // exact average of f over the translate of F by a level
  Rat average(const Int& level, const IntervalSet& f_set) const;

  // exact measure of {levels whose average trajectory over seq(1..horizon)
  // fluctuates across (alpha, beta) at least N times}, one value per entry
  // of n_list; closed-form over phase residues and chunk boundaries
  std::vector<Rat> fluctuation_measure(const FoelnerSequence& seq, const Rat& alpha,
                                       const Rat& beta, size_t horizon,
                                       const std::vector<long long>& n_list) const;

  // same count split per chunk (a boundary strip counts with its left chunk)
  std::vector<Int> chunk_profile(const FoelnerSequence& seq, const Rat& alpha,
                                 const Rat& beta, size_t horizon,
                                 long long n_fluct) const;

  std::string serialize() const;
  static StageFunction deserialize(std::istream& is);

  friend StageFunction apply_tower_stage(const StageFunction&, int, int, long long,
                                         const std::vector<uint8_t>&);

 private:
  int stage_ = 0;
  long long l_ = 0;   // phase modulus 2l; 0 for the zero function
  int base_ = 0;      // chunk exponent, fixed at the first stage
  int depth_ = 0;     // period exponent
  std::vector<uint8_t> mask_;  // size 2^(depth-base); {0} for the zero function
};

struct TowerParams {
  Rat eps, delta;
  size_t horizon_prev = 1;  // finite horizon certifying the previous stage
  size_t horizon_new = 1;   // finite horizon certifying the new stage
  long long n_upper = 0;    // N' : retention checked for all N <= N'
  long long n_new = 0;      // N'': fluctuation level the new stage must reach
  int depth_budget = 40;
};

struct TowerReport {
  int height_exp = 0;       // tower height 2^j
  int refine_exp = 0;       // sub-base split into 2^r cylinders
  Int selected;             // floor(0.99 * delta * 2^r) cylinders chosen
  Rat sub_base_measure;     // selected / 2^(j + r) aggregated over the tower
  Rat sub_base_target;      // 0.99 * delta
  Rat sub_base_shortfall;   // target - realized, dyadic, < delta/100
  Int window;               // L = max of the first horizon_prev sets
  Rat mu_new;               // measure of the N''-fluctuation set of the update
  bool reaches_new_level = false;            // mu_new > delta/10
  Rat disagreement;                          // window-L mismatch measure
  bool disagreement_bounded = false;         // <= delta
  std::vector<Rat> mu_before, mu_after;      // N = 0..N'
  bool retention = false;  // mu_after >= min(mu_before - eps, 1/10) for all N
  // exact stand-in for the ergodic-density requirement on the tower base:
  // fraction of base cylinders whose column meets every N <= N' quota
  size_t base_cols_ok = 0, base_cols = 0;
  bool base_density = false;
};

// One stage of the slow-decay construction: pick a tower tall enough that
// edge effects stay under eps/4, overwrite the column above a 0.99*delta
// sub-base with the square wave, and certify the three stage conclusions
// exactly by level counting.
StageFunction tower_update(const StageFunction& f, const FoelnerSequence& seq,
                           const Rat& alpha, const Rat& beta,
                           const BlockSequence& block, const TowerParams& p,
                           TowerReport& out);

struct CounterexampleParams {
  std::function<Rat(long long)> omega;  // decreasing decay target
  size_t stages = 1;                    // K
  Rat lambda = 1;
  long long l0 = 16;
  long long pairs = 2;    // desk per-family pair count (caps usable N)
  size_t horizon = 4;     // finite certification horizon n_k
  int depth_budget = 40;
};

struct StageRecord {
  size_t stage = 0;
  long long n_target_raw = 0;   // min N with omega(N) < 2^-(k+1)/10
  long long n_target = 0;       // after the desk cap
  bool capped = false;
  Rat mu_exact;                 // measure of the n_target fluctuation set
  Rat bound;                    // 2^-k / 10
  Rat tolerance;                // accumulated dyadic sub-base shortfall
  TowerReport tower;
};

struct CounterexampleReport {
  Rat alpha, beta;
  std::vector<StageRecord> records;
  StageFunction f;
  bool pass = false;
  std::string csv() const;  // stage,N_raw,N_used,capped,mu,bound,tolerance
};

CounterexampleReport run_counterexample(const CounterexampleParams& p);

}  // namespace ergolab
