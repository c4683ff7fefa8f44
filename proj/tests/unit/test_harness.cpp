#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "weyl/errors.hpp"
#include "weyl/harness.hpp"
#include "weyl/report.hpp"

using namespace weyl;

namespace {

std::size_t oscillator_levels_below(double hbar, double lambda) {
  std::size_t n = 0;
  while (hbar * (2.0 * static_cast<double>(n) + 1.0) < lambda) ++n;
  return n;
}

SweepConfig oscillator_sweep() {
  SweepConfig c;
  c.name = "ho";
  c.model = {Geometry::line(), Potential::harmonic({1.0})};
  c.lambda = 1.0;
  c.hbar_grid = {0.1, 0.05, 0.03};
  c.checks = {Check::WeylConvergence};
  return c;
}

SweepRow row(double hbar, double volume, double remainder) {
  SweepRow r;
  r.hbar = hbar;
  r.volume = volume;
  r.remainder = remainder;
  return r;
}

}  // namespace

TEST(Sweep, OscillatorCountsMatchLevels) {
  const SweepReport r = run_weyl_sweep(oscillator_sweep());
  ASSERT_TRUE(r.complete) << r.failure_detail;
  ASSERT_EQ(r.rows.size(), 3u);
  for (const SweepRow& row : r.rows) {
    EXPECT_EQ(row.n_count, oscillator_levels_below(row.hbar, 1.0)) << row.hbar;
    EXPECT_DOUBLE_EQ(row.scaled_count, 2.0 * std::numbers::pi * row.hbar * static_cast<double>(row.n_count));
    EXPECT_DOUBLE_EQ(row.remainder, row.scaled_count - row.volume);
    ASSERT_TRUE(row.truncation_ratio.has_value());
    EXPECT_GE(*row.truncation_ratio, 2.0);
  }
  EXPECT_NEAR(r.volume, std::numbers::pi, 1e-6);
}

TEST(Sweep, BelowPotentialMinimumCountsNothing) {
  SweepConfig c = oscillator_sweep();
  c.model = {Geometry::circle(2.0), Potential::constant(1, 1.0)};
  c.lambda = 0.5;
  const SweepReport r = run_weyl_sweep(c);
  ASSERT_TRUE(r.complete) << r.failure_detail;
  for (const SweepRow& row : r.rows) {
    EXPECT_EQ(row.n_count, 0u);
    EXPECT_FALSE(row.truncation_ratio.has_value());
  }
  EXPECT_EQ(r.volume, 0.0);
}

TEST(Fit, NeedsThreeRows) {
  EXPECT_THROW(fit_remainder({row(0.2, 1.0, 0.1), row(0.1, 1.0, 0.05)}), ConfigError);
}

TEST(Fit, PowerLawAndConstant) {
  const RemainderFit lin = fit_remainder({row(0.4, 1.0, 0.8), row(0.2, 1.0, -0.4), row(0.1, 1.0, 0.2)});
  EXPECT_NEAR(lin.slope, 1.0, 1e-12);
  EXPECT_EQ(lin.points, 3u);
  const RemainderFit flat = fit_remainder({row(0.4, 1.0, 0.3), row(0.2, 1.0, 0.3), row(0.1, 1.0, 0.3)});
  EXPECT_NEAR(flat.slope, 0.0, 1e-12);
  const RemainderFit zero = fit_remainder({row(0.4, 1.0, 0.3), row(0.2, 1.0, 0.0), row(0.1, 1.0, 0.3)});
  EXPECT_TRUE(zero.below_resolution);
}

TEST(Relative, IdenticalPairIsMonotone) {
  // With M = M̄ the inequality reduces to monotonicity of N in λ.
  const ModelSpec m{Geometry::line(), Potential::harmonic({1.0})};
  const EquivalentPair pair{m, m, Box::interval(-2.0, 2.0), 1.0};
  const auto rows = run_relative_check(pair, 1.0, {0.1, 0.07}, GridPolicy{}, 0.1);
  ASSERT_EQ(rows.size(), 2u);
  for (const RelativeRow& r : rows) {
    EXPECT_GE(r.n1, r.n2_shifted);
    EXPECT_EQ(r.forward, Status::Pass);
    EXPECT_GE(r.n2_upper, r.n1_upper_shifted);
    EXPECT_EQ(r.reverse, Status::Pass);
  }
}

TEST(Sweep, DeterministicJson) {
  SweepConfig c = oscillator_sweep();
  c.pair = {PairMode::Compactify, 2.0};
  c.checks = all_checks();
  c.mc_samples = 20000;
  c.seed = 5;
  const std::string a = to_json(run_weyl_sweep(c));
  const std::string b = to_json(run_weyl_sweep(c));
  EXPECT_EQ(a, b);
}

TEST(Sweep, ThreadsMatchSerial) {
  SweepConfig c = oscillator_sweep();
  c.pair = {PairMode::Compactify, 2.0};
  c.checks = all_checks();
  c.hbar_grid = {0.2, 0.1, 0.07, 0.05};
  const std::string serial = to_json(run_weyl_sweep(c));
  c.jobs = 3;
  EXPECT_EQ(to_json(run_weyl_sweep(c)), serial);
}

TEST(Sweep, CrossingWithoutRefinementIsNumericalFailure) {
  // ħ = 0.2 puts the level 5ħ on λ = 1; a wide window flags it.
  SweepConfig c = oscillator_sweep();
  c.hbar_grid = {0.2, 0.1, 0.05};
  c.crossing_window = 1e7;
  c.max_refinements = 0;
  const SweepReport r = run_weyl_sweep(c);
  EXPECT_FALSE(r.complete);
  EXPECT_EQ(r.failure, FailureKind::Numerical);
  EXPECT_NE(r.failure_detail.find("refinement exhausted"), std::string::npos) << r.failure_detail;
  EXPECT_FALSE(r.all_pass(false));
}

TEST(Sweep, CrossingResolvedByRefinement) {
  SweepConfig c = oscillator_sweep();
  c.hbar_grid = {0.2, 0.1, 0.05};
  c.crossing_window = 1e7;
  c.max_refinements = 2;
  const SweepReport r = run_weyl_sweep(c);
  ASSERT_TRUE(r.complete) << r.failure_detail;
  EXPECT_TRUE(r.rows[0].near_crossing);
  EXPECT_GE(r.rows[0].refinements, 1);
}

TEST(Validate, ListsEveryProblem) {
  SweepConfig c = oscillator_sweep();
  c.hbar_grid = {0.1, 0.2, -0.1};
  c.checks = {Check::WeylConvergence, Check::RankLemma};
  c.tolerance = 0.0;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("hbar_grid[1]: must be strictly decreasing"), std::string::npos) << msg;
    EXPECT_NE(msg.find("hbar_grid[2]: must be positive"), std::string::npos) << msg;
    EXPECT_NE(msg.find("pair:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("tolerance:"), std::string::npos) << msg;
  }
}

TEST(Status, Names) {
  EXPECT_EQ(to_string(Status::Pass), "PASS");
  EXPECT_EQ(to_string(Status::Fail), "FAIL");
  EXPECT_EQ(to_string(Status::Vacuous), "vacuous");
  EXPECT_EQ(to_string(Status::Skipped), "skipped");
  for (Check c : all_checks()) EXPECT_EQ(check_from_string(to_string(c)), c);
  EXPECT_THROW(check_from_string("Nope"), ConfigError);
}
