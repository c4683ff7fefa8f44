#pragma once

// ħ-sweeps: scaled counts against phase-space volumes, the relative counting
// inequality in both directions for an equivalent pair, and the localization
// checks that back it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "weyl/assembly.hpp"
#include "weyl/grid.hpp"
#include "weyl/model.hpp"
#include "weyl/spectra.hpp"

namespace weyl {

enum class Check { WeylConvergence, RelativeInequality, SandwichUpper, IMSSuite, RankLemma };

std::string to_string(Check check);
Check check_from_string(const std::string& name);  // throws ConfigError
const std::vector<Check>& all_checks();

enum class PairMode { None, Compactify, Identical };

std::string to_string(PairMode mode);

struct PairSpec {
  PairMode mode = PairMode::None;
  double margin = 2.0;  // length; U = sublevel box + margin/2
};

struct SweepConfig {
  std::string name = "experiment";
  ModelSpec model;
  PairSpec pair;
  double lambda = 1.0;
  std::vector<double> hbar_grid;
  GridPolicy grid;
  double crossing_window = 10.0;  // in units of the tie-break shift σ
  int max_refinements = 2;        // 1.5x resolution steps
  std::vector<Check> checks;
  double tolerance = 0.05;        // final |remainder| / volume
  double epsilon = 0.0;           // continuity margin target; 0 means 5% of the volume
  std::size_t mc_samples = 0;     // 0 skips the Monte Carlo cross-check
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool strict = false;            // vacuous rows count as failures
  bool dump_matrix = false;

  bool has(Check check) const;
  bool needs_pair() const;
  // Throws ConfigError listing every violation.
  void validate() const;
};

enum class Status { Pass, Fail, Vacuous, Skipped };

std::string to_string(Status status);

struct SweepRow {
  double hbar = 0.0;
  std::size_t n_count = 0;
  double scaled_count = 0.0;
  double volume = 0.0;
  double remainder = 0.0;  // scaled_count - volume
  CountingMethod counting_method = CountingMethod::InertiaLDLT;
  std::optional<double> truncation_ratio;  // absent on compact geometries
  std::size_t unknowns = 0;
  double spacing = 0.0;
  double shift = 0.0;
  int refinements = 0;
  bool near_crossing = false;
  std::optional<std::size_t> compact_count;
  std::optional<double> compact_scaled;
  Status relative_forward = Status::Skipped;
  Status relative_reverse = Status::Skipped;
  Status ims = Status::Skipped;
  Status rank_lemma = Status::Skipped;
};

struct RelativeRow {
  double hbar = 0.0;
  double c = 0.0;
  double c_hbar_sq = 0.0;
  std::size_t n1 = 0;          // N(H_a, λ)
  std::size_t n2_shifted = 0;  // N(H_b, λ - cħ²)
  Status forward = Status::Skipped;
  double delta = 0.0;
  double c_prime = 0.0;
  double c_prime_hbar_sq = 0.0;
  std::size_t n2_upper = 0;          // N(H_b, λ + δ)
  std::size_t n1_upper_shifted = 0;  // N(H_a, λ + δ - c'ħ²)
  Status reverse = Status::Skipped;
  double sandwich_gap = 0.0;  // |scaled N_b(λ) - scaled N_a(λ)|
  bool sandwich_closed = false;  // gap <= ε
  int refinements = 0;
};

struct ImsRow {
  double hbar = 0.0;
  double residual = 0.0;  // max over both members, relative to ‖H‖_max
  double unity_error = 0.0;
  bool partition_ok = false;
  std::string partition_detail;
  double deviation = 0.0;  // commutator vs -ħ²|dφ|², max over both members
  double norm_phi = 0.0;
  double norm_psi = 0.0;
  double limit = 0.0;
  bool bound_holds = false;
  Status status = Status::Skipped;
};

struct RankRow {
  double hbar = 0.0;
  bool evaluated = false;
  double min_eig_projected = 0.0;
  double min_eig_transported = 0.0;
  double psi_margin = 0.0;
  double c_hbar_sq = 0.0;
  bool vacuous = false;
  LemmaVerdict lemma = LemmaVerdict::Pass;
  std::size_t lemma_count = 0;
  std::size_t lemma_rank = 0;
  Status status = Status::Skipped;
};

struct RemainderFit {
  bool below_resolution = false;
  double slope = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

// Least-squares slope of log|remainder| against log ħ. Needs >= 3 rows with
// nonzero volume; a zero remainder makes the fit "below resolution".
RemainderFit fit_remainder(const std::vector<SweepRow>& rows);

struct Verdict {
  Check check = Check::WeylConvergence;
  std::string subject;  // "model" or "compact" for convergence verdicts
  Status status = Status::Skipped;
  double margin = 0.0;
  std::string detail;
};

struct Provenance {
  std::string config_hash;  // FNV-1a of the canonical config, hex
  std::uint64_t seed = 0;
  std::string version;
};

enum class FailureKind { None, Config, Numerical };

struct SweepReport {
  std::string name;
  double lambda = 0.0;
  std::string model;
  std::string pair;
  double volume = 0.0;
  double volume_error = 0.0;
  std::optional<double> monte_carlo_volume;
  std::optional<double> monte_carlo_error;
  std::optional<double> compact_volume;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> sandwich_closes_at;  // smallest ħ from which every later row closes
  std::vector<SweepRow> rows;
  std::vector<RelativeRow> relative;
  std::vector<ImsRow> ims;
  std::vector<RankRow> rank;
  std::optional<double> commutator_slope;
  RemainderFit fit;
  std::vector<Verdict> verdicts;
  Provenance provenance;
  bool complete = false;
  FailureKind failure = FailureKind::None;
  std::string failure_detail;

  bool all_pass(bool strict) const;
  bool any_fail(bool strict) const;
};

std::string library_version();

// Never throws for numerical or configuration trouble met mid-sweep: the
// report comes back incomplete with `failure` set. Invalid configs throw.
SweepReport run_weyl_sweep(const SweepConfig& config);

// The config's model assembled at `hbar` on its default grid for λ.
DiscreteOperator row_operator(const SweepConfig& config, double hbar);

// Forward and reverse relative inequality for one pair over `hbar_grid`.
std::vector<RelativeRow> run_relative_check(const EquivalentPair& pair, double lambda,
                                            const std::vector<double>& hbar_grid, const GridPolicy& policy,
                                            double delta, int max_refinements = 2);

}  // namespace weyl
