#include "ergolab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ergolab/counterexample.hpp"
#include "ergolab/covering.hpp"
#include "ergolab/dynamics.hpp"
#include "ergolab/foelner.hpp"

namespace ergolab {

namespace {

using json = nlohmann::json;

Rat parse_rat(const json& v, const char* field) {
  if (v.is_number_integer()) return Rat(v.get<long long>());
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    size_t slash = s.find('/');
    try {
      if (slash == std::string::npos) return Rat(Int(s));
      return Rat(Int(s.substr(0, slash)), Int(s.substr(slash + 1)));
    } catch (const std::exception&) {
    }
  }
  throw ConfigError(std::string(field) + ": expected an integer or \"p/q\"");
}

void reject_unknown(const json& obj, const char* where,
                    std::initializer_list<const char*> allowed) {
  for (auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
  }
}

const std::set<std::string> kKinds = {"check-sequence",  "cover",
                                      "decay-curve",     "bound-constants",
                                      "counterexample",  "proof-step"};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

class Budget {
 public:
  explicit Budget(double seconds) : limit_(seconds), start_(clock::now()) {}
  double elapsed() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }
  void check() const {
    if (limit_ > 0 && elapsed() > limit_) throw BudgetError("time budget exceeded");
  }

 private:
  using clock = std::chrono::steady_clock;
  double limit_;
  clock::time_point start_;
};

FoelnerSequence make_sequence(const ExperimentConfig& c) {
  if (c.sequence == "intervals")
    return builtin_sequence(BuiltinKind::Intervals, c.horizon, c.dim_or_base);
  if (c.sequence == "powers")
    return builtin_sequence(BuiltinKind::Powers, c.horizon, c.dim_or_base);
  if (c.sequence == "boxes")
    return builtin_sequence(BuiltinKind::Boxes, c.horizon, c.dim_or_base);
  if (c.sequence == "heisenberg_balls")
    return builtin_sequence(BuiltinKind::HeisenbergBalls, c.horizon, c.dim_or_base);
  if (c.sequence == "block-concat")
    return build_concatenated_foelner(c.lambda, c.l0, c.pairs, c.stages);
  throw ConfigError("sequence: unknown kind \"" + c.sequence + "\"");
}

SampleableSystem make_system(const ExperimentConfig& c) {
  if (c.system == "bernoulli") {
    if (!c.seed) throw ConfigError("bernoulli system requires a seed");
    return SampleableSystem::bernoulli_shift(*c.seed);
  }
  if (c.system == "rotation") return SampleableSystem::irrational_rotation(c.theta);
  if (c.system == "finite_cyclic") {
    std::vector<Rat> f(static_cast<size_t>(c.cyclic_m));
    for (long long i = 0; i < c.cyclic_m; ++i)
      f[static_cast<size_t>(i)] = (i % 2 == 0) ? Rat(1) : Rat(0);
    return SampleableSystem::finite_cyclic(c.cyclic_m, std::move(f));
  }
  if (c.system == "odometer") {
    std::vector<Rat> f(static_cast<size_t>(1) << c.odometer_depth);
    for (size_t i = 0; i < f.size(); ++i)
      f[i] = __builtin_popcountll(i) % 2;  // digit-parity observable
    return SampleableSystem::dyadic_odometer(c.odometer_depth, std::move(f));
  }
  throw ConfigError("system: unknown kind \"" + c.system + "\"");
}

void run_check_sequence(const ExperimentConfig& c, RunReport& r) {
  FoelnerSequence seq = make_sequence(c);
  size_t horizon = std::min<size_t>(static_cast<size_t>(c.horizon), seq.horizon());
  TemperednessReport rep = tempered_report(seq, horizon);
  r.columns = {"n", "left_ratio", "left_decimal", "right_ratio", "right_decimal",
               "exact"};
  for (size_t i = 0; i < rep.left_ratio.size(); ++i)
    r.rows.push_back({std::to_string(i + 2), rat_str(rep.left_ratio[i]),
                      decimal_text(rep.left_ratio[i]), rat_str(rep.right_ratio[i]),
                      decimal_text(rep.right_ratio[i]), "1"});
  r.summary.push_back("sequence: " + seq.provenance());
  r.summary.push_back("max left ratio:  " + rat_str(rep.max_left));
  r.summary.push_back("max right ratio: " + rat_str(rep.max_right));
  if (c.tempered_c > 0) {
    r.pass = rep.bi_tempered(c.tempered_c);
    r.summary.push_back("bi-tempered at c = " + rat_str(c.tempered_c) + ": " +
                        (r.pass ? "yes" : "NO"));
  } else {
    r.pass = true;
    r.summary.push_back("no temperedness threshold requested; ratios reported only");
  }
}

void run_cover(const ExperimentConfig& c, RunReport& r, const Budget& budget) {
  FoelnerSequence seq = builtin_sequence(BuiltinKind::Powers, c.horizon, 16);
  if (!is_lambda_good(seq, c.eps / 8, static_cast<size_t>(c.horizon)).good)
    throw ConfigError("powers sequence is not eps/8-good at this horizon");
  std::mt19937_64 rng(*c.seed);
  r.columns = {"instance", "centers", "q", "outcome", "coverage", "disjoint_ok"};
  size_t failures = 0;
  for (size_t t = 0; t < c.instances; ++t) {
    budget.check();
    size_t q = std::uniform_int_distribution<size_t>(1, 3)(rng);
    size_t n_centers = std::uniform_int_distribution<size_t>(1, 12)(rng);
    std::vector<Int> cs;
    for (size_t i = 0; i < n_centers; ++i)
      cs.push_back(std::uniform_int_distribution<long long>(-300, 300)(rng));
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    ScaleAssignment a;
    for (auto& ctr : cs) {
      std::vector<size_t> sc;
      size_t lo = 1;
      for (size_t k = 0; k < q; ++k) {
        lo = std::uniform_int_distribution<size_t>(
            lo, static_cast<size_t>(c.horizon) - (q - k - 1))(rng);
        sc.push_back(lo++);
      }
      a.centers.push_back(GroupElement::z(ctr));
      a.scales.push_back(sc);
    }
    FiniteSubset C = FiniteSubset::from_intervals(IntervalSet::from_values(cs));
    CoveringSelection sel = vitali_select(seq, C, a, c.eps);
    std::vector<FiniteSubset> translated;
    for (auto& p : sel.pairs)
      translated.push_back(translate(seq.at(p.scale), p.center, Side::Right));
    bool disjoint_ok = translated.empty() ||
                       certify_epsilon_disjoint(translated, c.eps).feasible;
    bool ok = sel.outcome != CoverOutcome::PostconditionFailed && disjoint_ok;
    if (!ok) ++failures;
    const char* oc = sel.outcome == CoverOutcome::Expansive    ? "expansive"
                     : sel.outcome == CoverOutcome::Covering   ? "covering"
                                                               : "failed";
    r.rows.push_back({std::to_string(t), std::to_string(cs.size()), std::to_string(q),
                      oc, rat_str(sel.coverage), disjoint_ok ? "1" : "0"});
  }
  r.pass = failures == 0;
  r.summary.push_back("instances: " + std::to_string(c.instances) +
                      ", failures: " + std::to_string(failures));
}

void run_decay_curve(const ExperimentConfig& c, RunReport& r, const Budget& budget) {
  SampleableSystem sys = make_system(c);
  FoelnerSequence seq = make_sequence(c);
  size_t horizon = std::min<size_t>(static_cast<size_t>(c.horizon), seq.horizon());
  r.columns = {"N", "estimate", "ci_low", "ci_high", "samples", "seed", "exact"};
  std::vector<std::pair<long long, double>> fit_rows;
  for (long long n = c.n_lo; n <= c.n_hi; ++n) {
    budget.check();
    FluctuationQuery q{c.alpha, c.beta, static_cast<size_t>(n), horizon};
    bool exact_ok = sys.kind() == SampleableSystem::Kind::FiniteCyclic ||
                    sys.kind() == SampleableSystem::Kind::DyadicOdometer;
    if (c.samples == 0 && exact_ok) {
      Rat mu = exact_mu_DN(sys, seq, q);
      double d = to_double(mu);
      r.rows.push_back({std::to_string(n), decimal_text(mu), decimal_text(mu),
                        decimal_text(mu), "all", "-", "1"});
      fit_rows.push_back({n, d});
    } else {
      if (c.samples == 0) throw ConfigError("samples = 0 needs an enumerable system");
      EstimateReport est = estimate_mu_DN(sys, seq, q, c.samples, *c.seed + n);
      r.rows.push_back({std::to_string(n), fmt_double(est.estimate),
                        fmt_double(est.ci_low), fmt_double(est.ci_high),
                        std::to_string(est.samples), std::to_string(est.seed), "0"});
      fit_rows.push_back({n, est.estimate});
    }
  }
  r.pass = true;
  try {
    DecayFit fit = fit_decay(fit_rows);
    r.summary.push_back("fit: c0_hat = " + fmt_double(fit.c0) +
                        ", c1_hat = " + fmt_double(fit.c1) +
                        ", residual = " + fmt_double(fit.residual));
    auto bc = theorem_bound_shifted(c.alpha, c.beta, sys.bound());
    if (bc) {
      r.summary.push_back("bound: c0 = " + fmt_double(bc->c0) +
                          ", c1 = " + rat_str(bc->c1));
      for (auto& [n, est] : fit_rows) {
        double cap = to_double(bc->c1) * std::pow(bc->c0, static_cast<double>(n));
        if (est > cap) {
          r.pass = false;
          r.summary.push_back("estimate at N=" + std::to_string(n) +
                              " exceeds the bound curve");
        }
      }
    }
  } catch (const std::invalid_argument&) {
    r.summary.push_back("fit: skipped (fewer than 3 positive estimates)");
  }
}

void run_bound_constants(const ExperimentConfig& c, RunReport& r) {
  auto bc = theorem_bound(c.bound_alpha, c.bound_beta, c.bound_s);
  r.columns = {"name", "value", "decimal", "exact"};
  if (!bc) {
    r.summary.push_back("no admissible constants for this gap");
    r.pass = false;
    return;
  }
  r.rows.push_back({"delta", rat_str(bc->delta), decimal_text(bc->delta), "1"});
  r.rows.push_back({"eps", rat_str(bc->eps), decimal_text(bc->eps), "1"});
  r.rows.push_back({"q", bc->q.str(), bc->q.str(), "1"});
  r.rows.push_back({"lambda", rat_str(bc->lambda), decimal_text(bc->lambda), "1"});
  r.rows.push_back({"c0", fmt_double(bc->c0), fmt_double(bc->c0), "0"});
  r.rows.push_back({"c1", rat_str(bc->c1), decimal_text(bc->c1), "1"});
  r.pass = growth_constants_ok(c.bound_alpha, c.bound_beta, c.bound_s, bc->eps,
                               bc->delta);
  r.summary.push_back(std::string("constant inequalities verified by substitution: ") +
                      (r.pass ? "yes" : "NO"));
}

void run_counterexample_kind(const ExperimentConfig& c, RunReport& r) {
  CounterexampleParams p;
  p.omega = [](long long n) { return Rat(1, Int(1) << n); };
  p.stages = c.stages;
  p.lambda = c.lambda;
  p.l0 = c.l0;
  p.pairs = c.pairs;
  p.depth_budget = c.depth_budget;
  CounterexampleReport rep = run_counterexample(p);
  r.columns = {"stage",       "N_raw",       "N_used",    "capped",
               "mu",          "mu_decimal",  "bound",     "tolerance",
               "height_exp",  "refine_exp",  "disagreement", "exact"};
  for (auto& rec : rep.records)
    r.rows.push_back({std::to_string(rec.stage), std::to_string(rec.n_target_raw),
                      std::to_string(rec.n_target), rec.capped ? "1" : "0",
                      rat_str(rec.mu_exact), decimal_text(rec.mu_exact),
                      rat_str(rec.bound), rat_str(rec.tolerance),
                      std::to_string(rec.tower.height_exp),
                      std::to_string(rec.tower.refine_exp),
                      decimal_text(rec.tower.disagreement), "1"});
  r.pass = rep.pass;
  r.summary.push_back("gap: (" + rat_str(rep.alpha) + ", " + rat_str(rep.beta) + ")");
  r.summary.push_back(std::string("all stage conclusions hold: ") +
                      (rep.pass ? "yes" : "NO"));
  for (auto& rec : rep.records)
    r.summary.push_back("stage " + std::to_string(rec.stage) + ": mu(D_N" +
                        std::to_string(rec.stage) + ") = " +
                        decimal_text(rec.mu_exact) + " > " + rat_str(rec.bound) +
                        " - " + decimal_text(rec.tolerance, 6));
}

void run_proof_step(const ExperimentConfig& c, RunReport& r) {
  // doubling-block observable on a cyclic system; dyadic window sequence
  const long long m = 1 << 14;
  std::vector<Rat> f(static_cast<size_t>(m));
  for (long long i = 0; i < m; ++i) {
    int bl = 0;
    while ((1ll << (bl + 1)) <= i + 1) ++bl;
    f[static_cast<size_t>(i)] = bl % 2;
  }
  SampleableSystem sys = SampleableSystem::finite_cyclic(m, std::move(f));
  std::vector<FiniteSubset> sets;
  for (int n = 1; n <= 13; ++n)
    sets.push_back(FiniteSubset::z_interval(0, (1ll << n) - 1));
  FoelnerSequence seq(Group::integers(), std::move(sets), "dyadic windows");

  GrowthParams p;
  p.alpha = Rat(46, 100);
  p.beta = Rat(54, 100);
  p.bound_s = 1;
  p.eps = Rat(1, 200);
  p.delta = Rat(2, 23);
  p.q = 2;
  p.n_k = 1;
  bool gates = growth_constants_ok(p.alpha, p.beta, p.bound_s, p.eps, p.delta);

  SampleableSystem::Point x;
  OrbitData orbit =
      collect_crossings(sys, seq, {GroupElement::z(0)}, x, p.alpha, p.beta, 13);
  if (orbit.up_scales[0].empty()) throw std::logic_error("no initial upcrossing");
  size_t n0 = orbit.up_scales[0].front();
  CoveringSelection b0;
  b0.eps = p.eps;
  b0.outcome = CoverOutcome::Covering;
  FiniteSubset w0 = seq.at(n0);
  b0.pairs = {{GroupElement::z(0), n0, w0}};
  b0.union_set = w0;

  GrowthResult res = growth_step(seq, orbit, b0, p);
  r.columns = {"center", "scale", "witness_size", "exact"};
  for (auto& pr : res.next.pairs)
    r.rows.push_back({element_text(pr.center), std::to_string(pr.scale),
                      pr.witness.cardinality().str(), "1"});
  r.pass = gates && res.next.outcome != CoverOutcome::PostconditionFailed &&
           res.growth >= 1 + p.delta / 2;
  r.summary.push_back("constant gates: " + std::string(gates ? "ok" : "VIOLATED"));
  r.summary.push_back("union growth: " + rat_str(res.growth) + " (need >= " +
                      rat_str(1 + p.delta / 2) + ")");
  r.summary.push_back(std::string("growth step certified: ") +
                      (r.pass ? "yes" : "NO"));
}

}  // namespace

std::string decimal_text(const Rat& v, int digits) {
  Int num = numerator(v), den = denominator(v);
  std::string sign = num < 0 ? "-" : "";
  if (num < 0) num = -num;
  std::string out = sign + Int(num / den).str() + ".";
  Int rem = num % den;
  for (int i = 0; i < digits; ++i) {
    rem *= 10;
    out += Int(rem / den).str();
    rem %= den;
  }
  return out;
}

ExperimentConfig parse_config(const std::string& json_text,
                              const std::string& kind_hint) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc, "config",
                 {"kind", "seed", "sequence", "system", "gap", "n_range", "samples",
                  "tempered_c", "eps", "instances", "construction", "bound",
                  "budget_seconds"});
  ExperimentConfig c;
  c.kind = doc.value("kind", kind_hint);
  if (!kind_hint.empty() && c.kind != kind_hint)
    throw ConfigError("config kind \"" + c.kind + "\" does not match the subcommand");
  if (!kKinds.count(c.kind)) throw ConfigError("unknown experiment kind \"" + c.kind + "\"");

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed: expected a u64");
    c.seed = doc["seed"].get<uint64_t>();
  }
  if (doc.contains("sequence")) {
    const json& s = doc["sequence"];
    reject_unknown(s, "sequence", {"kind", "horizon", "dim_or_base"});
    c.sequence = s.value("kind", c.sequence);
    c.horizon = s.value("horizon", c.horizon);
    c.dim_or_base = s.value("dim_or_base", c.dim_or_base);
  }
  if (doc.contains("system")) {
    const json& s = doc["system"];
    reject_unknown(s, "system", {"kind", "m", "depth", "theta"});
    c.system = s.value("kind", c.system);
    c.cyclic_m = s.value("m", c.cyclic_m);
    c.odometer_depth = s.value("depth", c.odometer_depth);
    c.theta = s.value("theta", c.theta);
  }
  if (doc.contains("gap")) {
    const json& g = doc["gap"];
    reject_unknown(g, "gap", {"alpha", "beta"});
    if (g.contains("alpha")) c.alpha = parse_rat(g["alpha"], "gap.alpha");
    if (g.contains("beta")) c.beta = parse_rat(g["beta"], "gap.beta");
  }
  if (doc.contains("n_range")) {
    const json& nr = doc["n_range"];
    if (!nr.is_array() || nr.size() != 2) throw ConfigError("n_range: expected [lo, hi]");
    c.n_lo = nr[0].get<long long>();
    c.n_hi = nr[1].get<long long>();
  }
  if (doc.contains("samples")) c.samples = doc["samples"].get<size_t>();
  if (doc.contains("tempered_c")) c.tempered_c = parse_rat(doc["tempered_c"], "tempered_c");
  if (doc.contains("eps")) c.eps = parse_rat(doc["eps"], "eps");
  if (doc.contains("instances")) c.instances = doc["instances"].get<size_t>();
  if (doc.contains("construction")) {
    const json& k = doc["construction"];
    reject_unknown(k, "construction", {"lambda", "l0", "pairs", "stages", "depth_budget"});
    if (k.contains("lambda")) c.lambda = parse_rat(k["lambda"], "construction.lambda");
    c.l0 = k.value("l0", c.l0);
    c.pairs = k.value("pairs", c.pairs);
    c.stages = k.value("stages", c.stages);
    c.depth_budget = k.value("depth_budget", c.depth_budget);
  }
  if (doc.contains("bound")) {
    const json& b = doc["bound"];
    reject_unknown(b, "bound", {"alpha", "beta", "s"});
    if (b.contains("alpha")) c.bound_alpha = parse_rat(b["alpha"], "bound.alpha");
    if (b.contains("beta")) c.bound_beta = parse_rat(b["beta"], "bound.beta");
    if (b.contains("s")) c.bound_s = parse_rat(b["s"], "bound.s");
  }
  if (doc.contains("budget_seconds")) c.budget_seconds = doc["budget_seconds"].get<double>();

  // invariants
  if (c.horizon < 1 || c.horizon > 64) throw ConfigError("horizon must be in [1, 64]");
  if (c.n_hi < c.n_lo) throw ConfigError("n_range is empty");
  if (!(c.alpha < c.beta)) throw ConfigError("gap requires alpha < beta");
  if (c.samples > 10000000) throw ConfigError("samples exceeds the budget (1e7)");
  if (c.instances > 10000) throw ConfigError("instances exceeds the budget (1e4)");
  if (c.stages < 1 || c.stages > 4) throw ConfigError("stages must be in [1, 4]");
  if (c.depth_budget < 1 || c.depth_budget > 64)
    throw ConfigError("depth_budget must be in [1, 64]");
  if (c.eps <= 0 || c.eps > 1) throw ConfigError("eps must be in (0, 1]");
  const bool stochastic =
      c.kind == "cover" || (c.kind == "decay-curve" && c.samples > 0);
  if (stochastic && !c.seed)
    throw ConfigError("seed is mandatory for stochastic experiments");
  return c;
}

std::string RunReport::csv() const {
  std::ostringstream os;
  os << "# ergolab report v1 kind=" << kind << "\n";
  for (size_t i = 0; i < columns.size(); ++i)
    os << (i ? "," : "") << columns[i];
  os << "\n";
  for (auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << "\n";
  }
  return os.str();
}

std::string RunReport::summary_text() const {
  std::ostringstream os;
  os << "experiment: " << kind << "\n";
  for (auto& line : summary) os << line << "\n";
  os << "rows: " << rows.size() << "\n";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3f", wall_seconds);
  os << "wall time: " << buf << " s\n";
  os << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

RunReport run(const ExperimentConfig& cfg) {
  Budget budget(cfg.budget_seconds);
  RunReport r;
  r.kind = cfg.kind;
  if (cfg.kind == "check-sequence") run_check_sequence(cfg, r);
  else if (cfg.kind == "cover") run_cover(cfg, r, budget);
  else if (cfg.kind == "decay-curve") run_decay_curve(cfg, r, budget);
  else if (cfg.kind == "bound-constants") run_bound_constants(cfg, r);
  else if (cfg.kind == "counterexample") run_counterexample_kind(cfg, r);
  else if (cfg.kind == "proof-step") run_proof_step(cfg, r);
  else throw ConfigError("unknown experiment kind \"" + cfg.kind + "\"");
  budget.check();
  r.wall_seconds = budget.elapsed();
  return r;
}

DecayFit fit_decay(const std::vector<std::pair<long long, double>>& rows) {
  std::vector<std::pair<double, double>> pts;  // (N, log est)
  for (auto& [n, est] : rows)
    if (est > 0) pts.push_back({static_cast<double>(n), std::log(est)});
  if (pts.size() < 3)
    throw std::invalid_argument("fit_decay needs at least 3 positive estimates");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double denom = n * sxx - sx * sx;
  double slope = denom == 0 ? 0 : (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  DecayFit fit;
  fit.c0 = std::exp(slope);
  fit.c1 = std::exp(intercept);
  double ss = 0;
  for (auto& [x, y] : pts) {
    double e = y - (intercept + slope * x);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace ergolab
