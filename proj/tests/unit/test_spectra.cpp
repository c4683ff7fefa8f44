#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "weyl/assembly.hpp"
#include "weyl/errors.hpp"
#include "weyl/spectra.hpp"

using namespace weyl;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& m) { return m.sparseView(0.0, 0.0); }

// Random symmetric matrix with about `per_row` off-diagonal couplings per row.
SparseMatrix random_symmetric(std::mt19937_64& rng, int n, int per_row) {
  std::uniform_int_distribution<int> col(0, n - 1);
  std::normal_distribution<double> val;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 2.0 * val(rng));
    for (int k = 0; k < per_row; ++k) {
      const int j = col(rng);
      if (j == i) continue;
      const double v = val(rng);
      t.emplace_back(i, j, v);
      t.emplace_back(j, i, v);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

std::size_t oscillator_levels_below(double hbar, double lambda) {
  std::size_t n = 0;
  while (hbar * (2.0 * static_cast<double>(n) + 1.0) < lambda) ++n;
  return n;
}

}  // namespace

TEST(CountBelow, DiagonalExample) {
  Eigen::MatrixXd d = Eigen::Vector3d(0.5, 1.5, 2.5).asDiagonal();
  EXPECT_EQ(count_below(sparse(d), 2.0).count, 2u);
  EXPECT_EQ(count_below(sparse(d), 2.0).method, CountingMethod::SturmTridiagonal);
  EXPECT_EQ(dense_count_oracle(d, 2.0).count, 2u);
}

TEST(CountBelow, NonNegativeOperatorHasNothingBelowZero) {
  const ModelSpec m{Geometry::plane(), Potential::harmonic({1.0, 2.0})};
  const DiscreteOperator op = assemble(m, make_grid(m, 0.3, 1.0, GridPolicy{}), 0.3);
  EXPECT_EQ(count_below(op, 0.0).count, 0u);
  EXPECT_EQ(count_below(op, -1.0).count, 0u);
  EXPECT_EQ(count_below(op, 0.0).method, CountingMethod::InertiaLDLT);
}

TEST(CountBelow, HarmonicOscillatorMatchesLevels) {
  const ModelSpec m{Geometry::line(), Potential::harmonic({1.0})};
  for (double hbar : {0.1, 0.05, 0.03}) {
    const DiscreteOperator op = assemble(m, make_grid(m, hbar, 1.0, GridPolicy{}), hbar);
    EXPECT_EQ(count_below(op, 1.0).count, oscillator_levels_below(hbar, 1.0)) << hbar;
  }
  const DiscreteOperator op = assemble(m, make_grid(m, 0.05, 1.0, GridPolicy{}), 0.05);
  EXPECT_EQ(count_below(op, 1.0).count, 10u);
}

TEST(CountBelow, TridiagonalSturmAgreesWithLdlt) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> val;
  const int n = 60;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = val(rng);
    if (i + 1 < n) m(i, i + 1) = m(i + 1, i) = val(rng);
  }
  // A stored zero far off the band pushes the same matrix through LDLᵀ.
  SparseMatrix band = sparse(m);
  SparseMatrix general = band;
  general.coeffRef(0, n - 1) = 0.0;
  general.coeffRef(n - 1, 0) = 0.0;
  for (double x = -3.0; x <= 3.0; x += 0.37) {
    const auto a = count_below(band, x);
    const auto b = count_below(general, x);
    EXPECT_EQ(a.method, CountingMethod::SturmTridiagonal);
    EXPECT_EQ(b.method, CountingMethod::InertiaLDLT);
    EXPECT_EQ(a.count, b.count);
    EXPECT_EQ(a.count, dense_count_oracle(m, x).count);
  }
}

TEST(DenseOracle, Examples) {
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  EXPECT_EQ(dense_count_oracle(swap, 0.0).count, 1u);
  EXPECT_EQ(dense_count_oracle(Eigen::MatrixXd::Identity(5, 5), 1.0).count, 0u);
  EXPECT_EQ(count_below(sparse(Eigen::MatrixXd::Identity(5, 5)), 1.0).count, 0u);
}

TEST(DenseOracle, RefusesHugeOrders) {
  SparseMatrix big(kDenseOrderGuard + 1, kDenseOrderGuard + 1);
  big.setIdentity();
  EXPECT_THROW(dense_count_oracle(big, 1.0), ConfigError);
}

TEST(CountBelow, RandomEquivalenceWithOracle) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> order(10, 200);
  std::uniform_int_distribution<int> density(1, 4);
  std::uniform_real_distribution<double> level(-4.0, 4.0);
  for (int t = 0; t < 100; ++t) {
    const SparseMatrix a = random_symmetric(rng, order(rng), density(rng));
    const double x = level(rng);
    ASSERT_EQ(count_below(a, x).count, dense_count_oracle(a, x).count) << "instance " << t;
  }
}

TEST(CountBelow, ShiftInvariance) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  std::uniform_real_distribution<double> level(-3.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    const SparseMatrix a = random_symmetric(rng, 80, 3);
    // Shifts and levels on a dyadic grid keep A + tI and λ + t exact.
    const double s = std::ldexp(std::round(std::ldexp(shift(rng), 8)), -8);
    const double x = std::ldexp(std::round(std::ldexp(level(rng), 8)), -8) + std::ldexp(1.0, -9);
    SparseMatrix b = a;
    for (int i = 0; i < b.rows(); ++i) b.coeffRef(i, i) += s;
    const auto n1 = count_below(a, x).count;
    const auto n2 = count_below(b, x + s).count;
    EXPECT_EQ(n1, n2) << "shift " << s;
    EXPECT_EQ(n1, dense_count_oracle(a, x).count);
  }
}

TEST(CountBelow, MonotoneInLambda) {
  std::mt19937_64 rng(8);
  const SparseMatrix a = random_symmetric(rng, 150, 3);
  std::size_t prev = 0;
  for (double x = -6.0; x <= 6.0; x += 0.05) {
    const auto n = count_below(a, x).count;
    EXPECT_GE(n, prev);
    EXPECT_LE(n, 150u);
    prev = n;
  }
}

TEST(CountBelow, ReportsTieBreakShift) {
  EXPECT_DOUBLE_EQ(tie_break_shift(0.5), 1e-9);
  EXPECT_DOUBLE_EQ(tie_break_shift(-20.0), 2e-8);
  Eigen::MatrixXd d = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  const auto r = count_below(sparse(d), 2.0);
  EXPECT_EQ(r.count, 1u);  // strict: the eigenvalue 2 is not below 2
  EXPECT_DOUBLE_EQ(r.shift_perturbation, 2e-9);
}

TEST(Inertia, ExactSingularShiftFlagsBreakdown) {
  Eigen::MatrixXd d = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  SparseMatrix a = sparse(d);
  a.coeffRef(0, 2) = 0.0;
  a.coeffRef(2, 0) = 0.0;
  const InertiaCounter counter(a);
  ASSERT_FALSE(counter.tridiagonal());
  const Inertia in = counter.inertia_at(2.0);
  EXPECT_TRUE(in.breakdown);
  EXPECT_EQ(counter.count(2.0).count, 1u);
}

TEST(Projector, Examples) {
  Eigen::MatrixXd d = Eigen::Vector3d(1.0, 2.0, 3.0).asDiagonal();
  const SpectralProjector p = spectral_projector(sparse(d), 2.5);
  ASSERT_EQ(p.rank(), 2u);
  Eigen::MatrixXd want = Eigen::MatrixXd::Zero(3, 3);
  want(0, 0) = want(1, 1) = 1.0;
  EXPECT_LE((p.matrix() - want).cwiseAbs().maxCoeff(), 1e-12);

  const ModelSpec m{Geometry::line(), Potential::harmonic({1.0})};
  const DiscreteOperator op = assemble(m, make_grid(m, 0.1, 1.0, GridPolicy{}), 0.1);
  EXPECT_EQ(spectral_projector(op, 0.0).rank(), 0u);
}

TEST(Projector, HarmonicTieAtLambda) {
  // Levels 0.1, 0.3, 0.5: the third sits on λ = 0.5 in the continuum, and the
  // second-order stencil lowers it slightly, so it is counted on any grid.
  const ModelSpec m{Geometry::line(), Potential::harmonic({1.0})};
  const DiscreteOperator op = assemble(m, make_grid(m, 0.1, 1.0, GridPolicy{}), 0.1);
  const SpectralProjector p = spectral_projector(op, 0.5);
  EXPECT_EQ(p.rank(), count_below(op, 0.5).count);
  EXPECT_EQ(p.rank(), 3u);
  EXPECT_LT(p.ritz_values[2], 0.5);
  EXPECT_GT(p.ritz_values[2], 0.5 - 1e-3);
  EXPECT_EQ(spectral_projector(op, 0.5 - 1e-3).rank(), 2u);
}

TEST(Projector, OrthonormalWithSmallResiduals) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const SparseMatrix a = random_symmetric(rng, 120, 2);
    const SpectralProjector p = spectral_projector(a, 0.3);
    EXPECT_EQ(p.rank(), count_below(a, 0.3).count);
    EXPECT_LE(p.max_orthogonality_error, 1e-10);
    const double norm = Eigen::MatrixXd(a).cwiseAbs().rowwise().sum().maxCoeff();
    EXPECT_LE(p.max_residual, 1e-8 * norm);
  }
}

TEST(RankLemma, Examples) {
  Eigen::MatrixXd a = Eigen::Vector2d(0.0, 2.0).asDiagonal();
  Eigen::MatrixXd b = Eigen::Vector2d(2.0, 0.0).asDiagonal();
  const RankLemmaResult r = rank_lemma_check(a, b, 2.0);
  EXPECT_EQ(r.verdict, LemmaVerdict::Pass);
  EXPECT_EQ(r.rank_b, 1u);
  EXPECT_EQ(r.count, 1u);

  const Eigen::MatrixXd big = 3.0 * Eigen::MatrixXd::Identity(4, 4);
  const RankLemmaResult z = rank_lemma_check(big, Eigen::MatrixXd::Zero(4, 4), 3.0);
  EXPECT_EQ(z.verdict, LemmaVerdict::Pass);
  EXPECT_EQ(z.count, 0u);
  EXPECT_EQ(z.rank_b, 0u);
}

TEST(RankLemma, PreconditionFailureIsNotALemmaFailure) {
  const Eigen::MatrixXd a = Eigen::Vector2d(0.0, 1.0).asDiagonal();
  const RankLemmaResult r = rank_lemma_check(a, Eigen::MatrixXd::Zero(2, 2), 0.5);
  EXPECT_EQ(r.verdict, LemmaVerdict::PreconditionFailed);
  EXPECT_EQ(to_string(r.verdict), "precondition-failed");
}

TEST(RankLemma, RandomLowRankPerturbations) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> order(5, 40);
  for (int t = 0; t < 50; ++t) {
    const int n = order(rng);
    const int k = std::uniform_int_distribution<int>(0, n)(rng);
    Eigen::MatrixXd a(n, n);
    for (auto& x : a.reshaped()) x = g(rng);
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::MatrixXd q(n, k);
    for (auto& x : q.reshaped()) x = g(rng);
    const Eigen::MatrixXd b = 3.0 * q * q.transpose();
    const double mu = min_eigenvalue(a + b);
    const RankLemmaResult r = rank_lemma_check(a, b, mu);
    EXPECT_EQ(r.verdict, LemmaVerdict::Pass) << t;
    EXPECT_LE(r.rank_b, static_cast<std::size_t>(k));
  }
}
