#include "weyl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "weyl/assembly.hpp"
#include "weyl/config.hpp"
#include "weyl/errors.hpp"
#include "weyl/ims.hpp"
#include "weyl/phasespace.hpp"

#ifndef WEYL_VERSION
#define WEYL_VERSION "0.0.0"
#endif

namespace weyl {

namespace {

constexpr double kResidualTolerance = 1e-12;
constexpr double kRefinementStep = 1.5;
constexpr std::size_t kRankCheckOrder = 1200;
constexpr unsigned kMonteCarloShards = 4;
constexpr double kStudyCellsPerRamp = 6.0;

struct CheckName {
  Check check;
  const char* name;
};

constexpr CheckName kCheckNames[] = {
    {Check::WeylConvergence, "WeylConvergence"},
    {Check::RelativeInequality, "RelativeInequality"},
    {Check::SandwichUpper, "SandwichUpper"},
    {Check::IMSSuite, "IMSSuite"},
    {Check::RankLemma, "RankLemma"},
};

double scaled(std::size_t n, double hbar, int dim) {
  return std::pow(2.0 * std::numbers::pi * hbar, dim) * static_cast<double>(n);
}

struct Tally {
  std::size_t count = 0;
  bool crossing = false;
  CountingResult result;
};

// Counts below x and flags an eigenvalue within window·σ of x.
Tally tally(const InertiaCounter& counter, double x, double window) {
  const double s = tie_break_shift(x);
  const CountingResult lo = counter.count(x - window * s);
  const CountingResult hi = counter.count(x + window * s);
  Tally t;
  if (lo.count == hi.count) {
    t.count = lo.count;
    t.result = lo;
    t.result.lambda = x;
    t.result.shift_perturbation = s;
    return t;
  }
  t.result = counter.count(x);
  t.count = t.result.count;
  t.crossing = true;
  return t;
}

struct Context {
  ModelSpec model;
  std::optional<EquivalentPair> pair;
  double lambda = 0.0;
  double delta = 0.0;
  bool forward = false;
  bool reverse = false;
  bool compact_baseline = false;
  bool ims = false;
  bool rank = false;
  GridPolicy policy;
  double window = 10.0;
  int max_refinements = 2;
};

struct Level {
  int level = 0;
  Grid grid_a;
  std::optional<Grid> grid_b;
  std::shared_ptr<DiscreteOperator> op_a;
  std::shared_ptr<DiscreteOperator> op_b;
  std::optional<PartitionPair> partition;
  CountingResult result_a;
  std::optional<double> truncation_ratio;
  std::vector<std::pair<std::string, Tally>> tallies;
  RelativeRow relative;
  std::optional<std::size_t> compact;

  bool any_crossing() const {
    return std::any_of(tallies.begin(), tallies.end(), [](const auto& t) { return t.second.crossing; });
  }
  bool relative_failed() const {
    return relative.forward == Status::Fail || relative.reverse == Status::Fail;
  }
};

Level evaluate_level(const Context& ctx, double hbar, int level) {
  GridPolicy policy = ctx.policy;
  policy.resolution_factor *= std::pow(kRefinementStep, level);
  const double lambda_max = ctx.lambda + ctx.delta;

  Level out;
  out.level = level;
  if (ctx.pair) {
    PairGrids grids = make_pair_grids(*ctx.pair, hbar, lambda_max, policy);
    out.grid_a = std::move(grids.a);
    out.grid_b = std::move(grids.b);
  } else {
    out.grid_a = make_grid(ctx.model, hbar, lambda_max, policy);
  }
  const ModelSpec& model_a = ctx.pair ? ctx.pair->model_a : ctx.model;
  out.op_a = std::make_shared<DiscreteOperator>(assemble(model_a, out.grid_a, hbar));
  if (!model_a.compact()) out.truncation_ratio = truncation_audit(model_a, out.grid_a, lambda_max).ratio;

  const InertiaCounter counter_a(out.op_a->matrix());
  const Tally na = tally(counter_a, ctx.lambda, ctx.window);
  out.result_a = na.result;
  out.tallies.emplace_back("N_a(lambda)", na);
  if (!ctx.pair) return out;

  const EquivalentPair& pair = *ctx.pair;
  out.op_b = std::make_shared<DiscreteOperator>(assemble(pair.model_b, *out.grid_b, hbar));
  const InertiaCounter counter_b(out.op_b->matrix());
  const double hbar2 = hbar * hbar;
  RelativeRow& rel = out.relative;
  rel.hbar = hbar;
  rel.n1 = na.count;
  rel.refinements = level;

  std::optional<std::size_t> nb_lambda;
  if (ctx.forward || ctx.ims || ctx.rank) {
    out.partition = build_partition(pair, out.grid_a, *out.grid_b, ctx.lambda);
  }
  if (ctx.forward) {
    rel.c = out.partition->a.c;
    rel.c_hbar_sq = rel.c * hbar2;
    const Tally t = tally(counter_b, ctx.lambda - rel.c_hbar_sq, ctx.window);
    out.tallies.emplace_back("N_b(lambda - c hbar^2)", t);
    rel.n2_shifted = t.count;
    if (rel.n1 < rel.n2_shifted) {
      rel.forward = Status::Fail;
    } else {
      rel.forward = rel.c_hbar_sq >= ctx.lambda ? Status::Vacuous : Status::Pass;
    }
  }
  if (ctx.compact_baseline || ctx.forward || ctx.reverse) {
    const Tally t = tally(counter_b, ctx.lambda, ctx.window);
    out.tallies.emplace_back("N_b(lambda)", t);
    nb_lambda = t.count;
    if (ctx.compact_baseline) out.compact = t.count;
  }
  if (ctx.reverse) {
    const PartitionPair upper = build_partition(pair, out.grid_a, *out.grid_b, ctx.lambda + ctx.delta);
    rel.delta = ctx.delta;
    rel.c_prime = upper.b.c;
    rel.c_prime_hbar_sq = rel.c_prime * hbar2;
    const Tally top = tally(counter_b, ctx.lambda + ctx.delta, ctx.window);
    const Tally low = tally(counter_a, ctx.lambda + ctx.delta - rel.c_prime_hbar_sq, ctx.window);
    out.tallies.emplace_back("N_b(lambda + delta)", top);
    out.tallies.emplace_back("N_a(lambda + delta - c' hbar^2)", low);
    rel.n2_upper = top.count;
    rel.n1_upper_shifted = low.count;
    if (rel.n2_upper < rel.n1_upper_shifted) {
      rel.reverse = Status::Fail;
    } else {
      rel.reverse = rel.c_prime_hbar_sq >= ctx.lambda + ctx.delta ? Status::Vacuous : Status::Pass;
    }
  }

  // Counting is monotone in λ on a fixed operator.
  if (nb_lambda) {
    const bool below_ok = !ctx.forward || rel.n2_shifted <= *nb_lambda;
    const bool above_ok = !ctx.reverse || *nb_lambda <= rel.n2_upper;
    if (!below_ok || !above_ok) {
      std::ostringstream os;
      os << "counting not monotone in lambda on the compact operator at hbar = " << hbar;
      throw NumericalError(os.str());
    }
  }
  return out;
}

std::string describe_crossings(const Level& prev, const Level& cur) {
  std::ostringstream os;
  for (std::size_t i = 0; i < cur.tallies.size(); ++i) {
    const auto& [label, t] = cur.tallies[i];
    if (!t.crossing && !(i < prev.tallies.size() && prev.tallies[i].second.crossing)) continue;
    os << " " << label << ": " << (i < prev.tallies.size() ? std::to_string(prev.tallies[i].second.count) : "-")
       << " -> " << t.count << ";";
  }
  return os.str();
}

bool crossings_agree(const Level& prev, const Level& cur) {
  for (std::size_t i = 0; i < cur.tallies.size() && i < prev.tallies.size(); ++i) {
    const bool flagged = prev.tallies[i].second.crossing || cur.tallies[i].second.crossing;
    if (flagged && prev.tallies[i].second.count != cur.tallies[i].second.count) return false;
  }
  return true;
}

// Runs levels at 1.5x resolution steps until near-crossing counts agree
// between consecutive levels and the relative inequalities hold.
Level evaluate_escalated(const Context& ctx, double hbar) {
  Level cur = evaluate_level(ctx, hbar, 0);
  bool resolved = !cur.any_crossing();
  for (int k = 1; k <= ctx.max_refinements; ++k) {
    if (resolved && !cur.relative_failed()) return cur;
    Level next = evaluate_level(ctx, hbar, k);
    resolved = !next.any_crossing() || crossings_agree(cur, next);
    if (!resolved && k == ctx.max_refinements) {
      std::ostringstream os;
      os << "refinement exhausted at hbar = " << hbar << " after " << k
         << " refinements: counts near an eigenvalue crossing disagree between resolutions;"
         << describe_crossings(cur, next);
      throw NumericalError(os.str());
    }
    cur = std::move(next);
  }
  if (!resolved) {
    std::ostringstream os;
    os << "refinement exhausted at hbar = " << hbar << ": an eigenvalue lies within " << ctx.window
       << " sigma of a counting threshold and no refinement is allowed;" << describe_crossings(cur, cur);
    throw NumericalError(os.str());
  }
  return cur;
}

struct JobOutput {
  SweepRow row;
  std::optional<RelativeRow> relative;
  std::optional<ImsRow> ims;
  std::optional<RankRow> rank;
};

ImsRow ims_row(const Level& lv, const EquivalentPair& pair, double hbar) {
  ImsRow r;
  r.hbar = hbar;
  const PartitionPair& pp = *lv.partition;
  const double ra = ims_residual(*lv.op_a, pp.a) / std::max(lv.op_a->max_abs_entry(), 1e-300);
  const double rb = ims_residual(*lv.op_b, pp.b) / std::max(lv.op_b->max_abs_entry(), 1e-300);
  r.residual = std::max(ra, rb);
  const PartitionAudit audit =
      audit_partition_pair(pp, lv.grid_a, *lv.grid_b, pair.model_a.potential, pair.model_b.potential);
  r.unity_error = audit.max_unity_error;
  r.partition_ok = audit.ok();
  r.partition_detail = audit.detail;
  const CommutatorReport ca = commutator_check(*lv.op_a, pp.a);
  const CommutatorReport cb = commutator_check(*lv.op_b, pp.b);
  r.deviation = std::max(ca.max_deviation, cb.max_deviation);
  r.norm_phi = std::max(ca.norm_phi, cb.norm_phi);
  r.norm_psi = std::max(ca.norm_psi, cb.norm_psi);
  r.limit = ca.limit;
  r.bound_holds = ca.bound_holds && cb.bound_holds;
  r.status = r.residual <= kResidualTolerance && r.partition_ok && r.bound_holds ? Status::Pass : Status::Fail;
  return r;
}

RankRow rank_row(const Level& lv, double lambda, double hbar) {
  RankRow r;
  r.hbar = hbar;
  if (lv.op_a->order() > kRankCheckOrder || lv.op_b->order() > kRankCheckOrder) return r;
  const CountingResult n = count_below(*lv.op_a, lambda);
  if (n.count > kProjectorRankGuard) return r;
  const SpectralProjector proj = spectral_projector(*lv.op_a, lambda);
  const LocalizedBoundReport b = localized_bound_check(*lv.op_a, lv.partition->a, proj, *lv.op_b, lv.partition->b);
  r.evaluated = true;
  r.min_eig_projected = b.min_eig_projected;
  r.min_eig_transported = b.min_eig_transported;
  r.psi_margin = b.psi_margin;
  r.c_hbar_sq = b.c_hbar_sq;
  r.vacuous = b.vacuous;
  r.lemma = b.lemma.verdict;
  r.lemma_count = b.lemma.count;
  r.lemma_rank = b.lemma.rank_b;
  const bool ok = b.projected_ok && b.transported_ok && b.lemma.verdict == LemmaVerdict::Pass;
  r.status = !ok ? Status::Fail : (b.vacuous ? Status::Vacuous : Status::Pass);
  return r;
}

JobOutput run_row(const Context& ctx, double hbar, double volume) {
  const Level lv = evaluate_escalated(ctx, hbar);
  const int dim = ctx.model.dim();
  JobOutput out;
  SweepRow& row = out.row;
  row.hbar = hbar;
  row.n_count = lv.tallies.front().second.count;
  row.scaled_count = scaled(row.n_count, hbar, dim);
  row.volume = volume;
  row.remainder = row.scaled_count - row.volume;
  row.counting_method = lv.result_a.method;
  row.truncation_ratio = lv.truncation_ratio;
  row.unknowns = lv.grid_a.size();
  row.spacing = lv.grid_a.min_spacing();
  row.shift = lv.result_a.shift_perturbation;
  row.refinements = lv.level;
  row.near_crossing = lv.any_crossing();
  if (lv.compact) {
    row.compact_count = lv.compact;
    row.compact_scaled = scaled(*lv.compact, hbar, dim);
  }
  if (ctx.pair) {
    out.relative = lv.relative;
    row.relative_forward = lv.relative.forward;
    row.relative_reverse = lv.relative.reverse;
    if (ctx.ims) {
      out.ims = ims_row(lv, *ctx.pair, hbar);
      row.ims = out.ims->status;
    }
    if (ctx.rank) {
      out.rank = rank_row(lv, ctx.lambda, hbar);
      row.rank_lemma = out.rank->status;
    }
  }
  return out;
}

// Executes rows on `jobs` workers; results are stored by index so the
// reduction order does not depend on scheduling.
std::vector<std::optional<JobOutput>> run_rows(const Context& ctx, const std::vector<double>& hbars, double volume,
                                               unsigned jobs, std::vector<std::exception_ptr>& errors) {
  const std::size_t n = hbars.size();
  std::vector<std::optional<JobOutput>> out(n);
  errors.assign(n, nullptr);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = run_row(ctx, hbars[i], volume);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (workers == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

EquivalentPair make_pair(const SweepConfig& config) {
  if (config.pair.mode == PairMode::Compactify) return compactify(config.model, config.lambda, config.pair.margin);
  EquivalentPair pair;
  pair.model_a = config.model;
  pair.model_b = config.model;
  pair.lambda = config.lambda;
  Box b = sublevel_set_bound(config.model, config.lambda);
  if (b.is_empty()) b = Box::centered(config.model.dim(), 0.0);
  pair.region = b.expanded(0.5 * config.pair.margin);
  return pair;
}

Status aggregate(const std::vector<Status>& rows) {
  bool any = false;
  bool vacuous = false;
  for (Status s : rows) {
    if (s == Status::Fail) return Status::Fail;
    if (s == Status::Skipped) continue;
    any = true;
    vacuous = vacuous || s == Status::Vacuous;
  }
  if (!any) return Status::Skipped;
  return vacuous ? Status::Vacuous : Status::Pass;
}

Verdict convergence_verdict(const std::vector<double>& remainders, double volume, double volume_error,
                            double tolerance, const std::string& subject) {
  Verdict v;
  v.check = Check::WeylConvergence;
  v.subject = subject;
  const std::size_t n = remainders.size();
  if (n < 3) {
    v.status = Status::Skipped;
    v.detail = "fewer than 3 rows";
    return v;
  }
  const double noise = std::max(4.0 * volume_error, 1e-12 * std::max(volume, 1.0));
  bool monotone = true;
  for (std::size_t i = n - 3; i + 1 < n; ++i) {
    if (std::abs(remainders[i + 1]) > std::abs(remainders[i]) + noise) monotone = false;
  }
  const double final_rel = volume > 0.0 ? std::abs(remainders.back()) / volume : std::abs(remainders.back());
  v.margin = tolerance - final_rel;
  std::ostringstream os;
  os << "final |remainder|/volume = " << final_rel << " (tolerance " << tolerance << "); last three |remainder| "
     << (monotone ? "non-increasing" : "increasing") << " within " << noise;
  v.detail = os.str();
  v.status = monotone && final_rel <= tolerance ? Status::Pass : Status::Fail;
  return v;
}

}  // namespace

std::string to_string(Check check) {
  for (const auto& c : kCheckNames) {
    if (c.check == check) return c.name;
  }
  return "unknown";
}

Check check_from_string(const std::string& name) {
  for (const auto& c : kCheckNames) {
    if (name == c.name) return c.check;
  }
  throw ConfigError("unknown check '" + name + "'");
}

const std::vector<Check>& all_checks() {
  static const std::vector<Check> checks = [] {
    std::vector<Check> v;
    for (const auto& c : kCheckNames) v.push_back(c.check);
    return v;
  }();
  return checks;
}

std::string to_string(PairMode mode) {
  switch (mode) {
    case PairMode::None: return "none";
    case PairMode::Compactify: return "compactify";
    case PairMode::Identical: return "identical";
  }
  return "none";
}

std::string to_string(Status status) {
  switch (status) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Vacuous: return "vacuous";
    case Status::Skipped: return "skipped";
  }
  return "skipped";
}

bool SweepConfig::has(Check check) const { return std::find(checks.begin(), checks.end(), check) != checks.end(); }

bool SweepConfig::needs_pair() const {
  return has(Check::RelativeInequality) || has(Check::SandwichUpper) || has(Check::IMSSuite) ||
         has(Check::RankLemma);
}

void SweepConfig::validate() const {
  std::vector<std::string> problems;
  if (name.empty()) problems.push_back("name: must not be empty");
  try {
    model.validate();
  } catch (const ConfigError& e) {
    problems.push_back(std::string("model: ") + e.what());
  }
  if (!std::isfinite(lambda)) problems.push_back("lambda: must be finite");
  if (hbar_grid.empty()) problems.push_back("hbar_grid: must not be empty");
  for (std::size_t i = 0; i < hbar_grid.size(); ++i) {
    if (!(hbar_grid[i] > 0.0) || !std::isfinite(hbar_grid[i])) {
      problems.push_back("hbar_grid[" + std::to_string(i) + "]: must be positive");
    }
    if (i > 0 && !(hbar_grid[i] < hbar_grid[i - 1])) {
      problems.push_back("hbar_grid[" + std::to_string(i) + "]: must be strictly decreasing");
    }
  }
  if (has(Check::WeylConvergence) && hbar_grid.size() < 3) {
    problems.push_back("hbar_grid: WeylConvergence needs at least 3 values");
  }
  if (needs_pair() && pair.mode == PairMode::None) {
    problems.push_back("pair: checks RelativeInequality, SandwichUpper, IMSSuite and RankLemma need a pair");
  }
  if (pair.mode == PairMode::Compactify && model.compact()) {
    problems.push_back("pair.mode: compactify needs a non-compact model");
  }
  if (pair.mode != PairMode::None && !(pair.margin > 0.0)) problems.push_back("pair.margin: must be positive");
  if (!(grid.resolution_factor > 0.0)) problems.push_back("grid.resolution_factor: must be positive");
  if (!(grid.safety_factor >= 2.0)) problems.push_back("grid.safety_factor: must be at least 2");
  if (!(grid.decay_action >= 0.0)) problems.push_back("grid.decay_action: must be non-negative");
  if (grid.max_unknowns == 0) problems.push_back("grid.max_unknowns: must be positive");
  if (!(crossing_window >= 1.0)) problems.push_back("grid.crossing_window: must be at least 1");
  if (max_refinements < 0) problems.push_back("grid.max_refinements: must be non-negative");
  if (!(tolerance > 0.0)) problems.push_back("tolerance: must be positive");
  if (epsilon < 0.0) problems.push_back("epsilon: must be non-negative");
  if (mc_samples != 0 && mc_samples < 10000) problems.push_back("mc_samples: must be 0 or at least 10000");
  if (jobs == 0) problems.push_back("jobs: must be positive");
  if (!problems.empty()) {
    std::ostringstream os;
    os << "experiment '" << name << "':";
    for (const auto& p : problems) os << "\n  " << p;
    throw ConfigError(os.str());
  }
}

bool SweepReport::all_pass(bool strict) const { return complete && !any_fail(strict); }

bool SweepReport::any_fail(bool strict) const {
  for (const auto& v : verdicts) {
    if (v.status == Status::Fail) return true;
    if (strict && v.status == Status::Vacuous) return true;
  }
  return false;
}

std::string library_version() { return WEYL_VERSION; }

RemainderFit fit_remainder(const std::vector<SweepRow>& rows) {
  std::vector<double> h;
  std::vector<double> r;
  RemainderFit fit;
  for (const auto& row : rows) {
    if (row.volume <= 0.0) continue;
    if (row.remainder == 0.0) fit.below_resolution = true;
    h.push_back(row.hbar);
    r.push_back(std::abs(row.remainder));
  }
  fit.points = h.size();
  if (h.size() < 3) throw ConfigError("remainder fit needs at least 3 rows with nonzero volume");
  if (fit.below_resolution) return fit;
  fit.slope = loglog_slope(h, r, &fit.r_squared);
  return fit;
}

std::vector<RelativeRow> run_relative_check(const EquivalentPair& pair, double lambda,
                                            const std::vector<double>& hbar_grid, const GridPolicy& policy,
                                            double delta, int max_refinements) {
  Context ctx;
  ctx.model = pair.model_a;
  ctx.pair = pair;
  ctx.lambda = lambda;
  ctx.delta = delta;
  ctx.forward = true;
  ctx.reverse = delta > 0.0;
  ctx.policy = policy;
  ctx.max_refinements = max_refinements;
  std::vector<RelativeRow> rows;
  for (double hbar : hbar_grid) rows.push_back(evaluate_escalated(ctx, hbar).relative);
  return rows;
}

DiscreteOperator row_operator(const SweepConfig& config, double hbar) {
  config.validate();
  return assemble(config.model, make_grid(config.model, hbar, config.lambda, config.grid), hbar);
}

SweepReport run_weyl_sweep(const SweepConfig& config) {
  config.validate();
  SweepReport report;
  report.name = config.name;
  report.lambda = config.lambda;
  report.model = to_string(config.model.geometry.kind) + ", " + config.model.potential.describe();
  report.pair = to_string(config.pair.mode);
  report.provenance.config_hash = config_fingerprint(config);
  report.provenance.seed = config.seed;
  report.provenance.version = library_version();

  try {
    const PhaseSpaceVolume vol = volume_reduced(config.model, config.lambda);
    report.volume = vol.value;
    report.volume_error = vol.error_estimate;
    if (config.mc_samples > 0) {
      const PhaseSpaceVolume mc =
          volume_monte_carlo(config.model, config.lambda, config.mc_samples, config.seed, kMonteCarloShards);
      report.monte_carlo_volume = mc.value;
      report.monte_carlo_error = mc.error_estimate;
    }

    Context ctx;
    ctx.model = config.model;
    ctx.lambda = config.lambda;
    ctx.policy = config.grid;
    ctx.window = config.crossing_window;
    ctx.max_refinements = config.max_refinements;
    double compact_volume_error = 0.0;
    if (config.pair.mode != PairMode::None) {
      const EquivalentPair pair = make_pair(config);
      ctx.pair = pair;
      ctx.forward = config.has(Check::RelativeInequality);
      ctx.reverse = config.has(Check::SandwichUpper);
      ctx.ims = config.has(Check::IMSSuite);
      ctx.rank = config.has(Check::RankLemma);
      ctx.compact_baseline = config.pair.mode == PairMode::Compactify;
      if (ctx.compact_baseline) {
        const PhaseSpaceVolume cv = volume_reduced(pair.model_b, config.lambda);
        report.compact_volume = cv.value;
        compact_volume_error = cv.error_estimate;
      }
      if (ctx.reverse || ctx.compact_baseline) {
        const double eps = config.epsilon > 0.0 ? config.epsilon : std::max(0.05 * report.volume, 1e-6);
        report.epsilon = eps;
        const double audit_spacing = target_spacing(config.hbar_grid.back(), config.lambda, config.grid);
        if (ctx.reverse) {
          const ContinuityMargin m = continuity_margin(config.model, config.lambda, eps, &pair, audit_spacing);
          ctx.delta = m.delta;
          report.delta = m.delta;
        }
      }
    }

    std::vector<std::exception_ptr> errors;
    const auto outputs = run_rows(ctx, config.hbar_grid, report.volume, config.jobs, errors);
    for (std::size_t i = 0; i < outputs.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      const JobOutput& o = *outputs[i];
      report.rows.push_back(o.row);
      if (o.relative) {
        RelativeRow rel = *o.relative;
        if (o.row.compact_scaled && report.epsilon) {
          rel.sandwich_gap = std::abs(*o.row.compact_scaled - o.row.scaled_count);
          rel.sandwich_closed = rel.sandwich_gap <= *report.epsilon;
        }
        report.relative.push_back(rel);
      }
      if (o.ims) report.ims.push_back(*o.ims);
      if (o.rank) report.rank.push_back(*o.rank);
    }

    if (ctx.pair && ctx.compact_baseline && report.epsilon) {
      for (std::size_t i = report.relative.size(); i-- > 0;) {
        if (!report.relative[i].sandwich_closed) break;
        report.sandwich_closes_at = report.relative[i].hbar;
      }
    }

    std::optional<RefinementStudy> study;
    if (ctx.ims) {
      const EquivalentPair& pair = *ctx.pair;
      const double hbar = config.hbar_grid.front();
      const PairGrids base = make_pair_grids(pair, hbar, config.lambda + ctx.delta, config.grid);
      const PartitionPair pp = build_partition(pair, base.a, base.b, config.lambda);
      // Spacings tied to the ramp width, halved twice, independent of ħ.
      const double lambda_max = config.lambda + ctx.delta;
      const double h0 = pp.b.profile.width / kStudyCellsPerRamp;
      std::vector<Grid> grids;
      for (int k = 0; k < 3; ++k) {
        GridPolicy p = config.grid;
        p.resolution_factor = hbar * std::pow(2.0, k) / (h0 * std::sqrt(lambda_max));
        grids.push_back(make_grid(pair.model_b, hbar, lambda_max, p));
      }
      study = commutator_refinement(pair.model_b, pp.b.profile, hbar, grids, pair.region, config.lambda);
      report.commutator_slope = study->slope;
    }

    // Verdicts.
    if (config.has(Check::WeylConvergence)) {
      std::vector<double> rem;
      for (const auto& r : report.rows) rem.push_back(r.remainder);
      report.verdicts.push_back(convergence_verdict(rem, report.volume, report.volume_error, config.tolerance, "model"));
      if (report.compact_volume) {
        std::vector<double> crem;
        for (const auto& r : report.rows) crem.push_back(*r.compact_scaled - *report.compact_volume);
        report.verdicts.push_back(
            convergence_verdict(crem, *report.compact_volume, compact_volume_error, config.tolerance, "compact"));
      }
    }
    auto relative_verdict = [&](Check check, bool forward) {
      Verdict v;
      v.check = check;
      v.subject = "pair";
      std::vector<Status> st;
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& r : report.relative) {
        st.push_back(forward ? r.forward : r.reverse);
        const double m = forward ? static_cast<double>(r.n1) - static_cast<double>(r.n2_shifted)
                                 : static_cast<double>(r.n2_upper) - static_cast<double>(r.n1_upper_shifted);
        margin = std::min(margin, m);
      }
      v.status = aggregate(st);
      v.margin = std::isfinite(margin) ? margin : 0.0;
      std::ostringstream os;
      os << "minimum count margin " << v.margin << " over " << st.size() << " rows";
      if (!forward && report.delta) os << "; delta = " << *report.delta;
      v.detail = os.str();
      report.verdicts.push_back(v);
    };
    if (config.has(Check::RelativeInequality)) relative_verdict(Check::RelativeInequality, true);
    if (config.has(Check::SandwichUpper)) relative_verdict(Check::SandwichUpper, false);
    if (config.has(Check::IMSSuite)) {
      Verdict v;
      v.check = Check::IMSSuite;
      v.subject = "pair";
      std::vector<Status> st;
      double worst = 0.0;
      double slack = std::numeric_limits<double>::infinity();
      for (const auto& r : report.ims) {
        st.push_back(r.status);
        worst = std::max(worst, r.residual);
        slack = std::min(slack, r.limit - std::max(r.norm_phi, r.norm_psi));
      }
      v.status = aggregate(st);
      std::ostringstream os;
      os << "max relative IMS residual " << worst << "; commutator slope " << study->slope;
      if (study->flagged) {
        v.status = Status::Fail;
        os << " outside [1.5, 2.5]";
      }
      v.margin = std::isfinite(slack) ? slack : 0.0;
      v.detail = os.str();
      report.verdicts.push_back(v);
    }
    if (config.has(Check::RankLemma)) {
      Verdict v;
      v.check = Check::RankLemma;
      v.subject = "pair";
      std::vector<Status> st;
      double slack = std::numeric_limits<double>::infinity();
      std::size_t evaluated = 0;
      for (const auto& r : report.rank) {
        st.push_back(r.status);
        if (!r.evaluated) continue;
        ++evaluated;
        slack = std::min(slack, r.min_eig_transported - (config.lambda - r.c_hbar_sq));
      }
      v.status = aggregate(st);
      v.margin = std::isfinite(slack) ? slack : 0.0;
      v.detail = std::to_string(evaluated) + " of " + std::to_string(report.rank.size()) +
                 " rows small enough for dense checks";
      report.verdicts.push_back(v);
    }

    if (report.rows.size() >= 3) {
      try {
        report.fit = fit_remainder(report.rows);
      } catch (const ConfigError&) {
        report.fit = RemainderFit{};
      }
    }
    report.complete = true;
  } catch (const NumericalError& e) {
    report.failure = FailureKind::Numerical;
    report.failure_detail = e.what();
  } catch (const ConfigError& e) {
    report.failure = FailureKind::Config;
    report.failure_detail = e.what();
  }
  return report;
}

}  // namespace weyl
