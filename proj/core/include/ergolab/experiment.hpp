#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab {

// schema violation -> exit 2
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// wall-clock budget exceeded -> exit 3
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One experiment invocation, fully described; parsed from a JSON document.
// Unknown keys are rejected so typos cannot silently fall back to defaults.
struct ExperimentConfig {
  std::string kind;  // check-sequence | cover | decay-curve | bound-constants
                     // | counterexample | proof-step

  // sequence block
  std::string sequence = "intervals";  // intervals|powers|boxes|heisenberg_balls|block-concat
  int horizon = 16;
  int dim_or_base = 1;

  // system block (decay-curve)
  std::string system = "bernoulli";  // bernoulli|finite_cyclic|rotation|odometer
  long long cyclic_m = 64;
  int odometer_depth = 8;
  double theta = 0.41421356237309503;  // sqrt(2)-1

  // fluctuation query
  Rat alpha = Rat(2, 5), beta = Rat(3, 5);
  long long n_lo = 0, n_hi = 3;
  size_t samples = 1000;
  std::optional<uint64_t> seed;  // mandatory for stochastic kinds

  // certification thresholds
  Rat tempered_c = 0;  // 0 = report ratios only
  Rat eps = Rat(1, 2);
  size_t instances = 50;

  // staged construction block
  Rat lambda = 1;
  long long l0 = 16, pairs = 2;
  size_t stages = 1;
  int depth_budget = 40;

  // constants block
  Rat bound_alpha = 1, bound_beta = 2, bound_s = 2;

  double budget_seconds = 0;  // 0 = unlimited
};

// throws ConfigError on malformed JSON, unknown keys, or invariant violations;
// kind_hint (the CLI subcommand) wins over an absent "kind" field and must
// agree with a present one
ExperimentConfig parse_config(const std::string& json_text, const std::string& kind_hint);

struct RunReport {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> summary;  // human-readable lines
  bool pass = false;
  double wall_seconds = 0;

  std::string csv() const;           // deterministic: depends only on config+seed
  std::string summary_text() const;  // includes wall time; not covered by the
                                     // byte-identical guarantee
};

// dispatches on kind; throws BudgetError when budget_seconds is exceeded
RunReport run(const ExperimentConfig& cfg);

struct DecayFit {
  double c0 = 0, c1 = 0, residual = 0;
};

// least squares of log(estimate) against N over rows with positive estimate;
// throws std::invalid_argument with fewer than 3 usable rows
DecayFit fit_decay(const std::vector<std::pair<long long, double>>& rows);

// exact decimal expansion of a rational, round-toward-zero, fixed digit count
std::string decimal_text(const Rat& v, int digits = 9);

}  // namespace ergolab
