#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>

#include "weyl/assembly.hpp"
#include "weyl/errors.hpp"
#include "weyl/ims.hpp"

using namespace weyl;

namespace {

ModelSpec harmonic1d() { return {Geometry::line(), Potential::harmonic({1.0})}; }

Eigen::VectorXd eigenvalues(const DiscreteOperator& op) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(op.matrix()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

TEST(Assemble, CircleCirculant) {
  const ModelSpec circle{Geometry::circle(2.0 * M_PI), Potential::constant(1, 0.0)};
  const Grid g = make_uniform_grid(circle, {4, 0});
  const DiscreteOperator op = assemble(circle, g, 1.0);
  const double h = M_PI / 2.0;
  ASSERT_DOUBLE_EQ(g.axes[0].spacing, h);
  const Eigen::MatrixXd m(op.matrix());
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const int d = (i - j + 4) % 4;
      const double want = d == 0 ? 2.0 / (h * h) : (d == 2 ? 0.0 : -1.0 / (h * h));
      EXPECT_DOUBLE_EQ(m(i, j), want) << i << "," << j;
    }
  }
}

TEST(Assemble, IntervalTridiagonal) {
  const ModelSpec interval{Geometry::interval(1.0), Potential::constant(1, 0.0)};
  const DiscreteOperator op = assemble(interval, make_uniform_grid(interval, {3, 0}), 1.0);
  const Eigen::MatrixXd m(op.matrix());
  Eigen::MatrixXd want(3, 3);
  want << 32, -16, 0, -16, 32, -16, 0, -16, 32;
  EXPECT_EQ((m - want).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assemble, HarmonicGroundState) {
  const ModelSpec m = harmonic1d();
  const Grid g = make_uniform_grid(m, {801, 0}, Truncation{Box::interval(-4.0, 4.0), 1.0, 2.0});
  const DiscreteOperator op = assemble(m, g, 0.1);
  EXPECT_NEAR(eigenvalues(op)[0], 0.1, 1e-3);
}

TEST(Assemble, TorusStencilEntries) {
  const ModelSpec torus{Geometry::torus(3.0, 2.0), Potential::constant(2, 0.5)};
  const Grid g = make_uniform_grid(torus, {6, 4});
  const DiscreteOperator op = assemble(torus, g, 0.3);
  const double hx = 0.5, hy = 0.5, hb2 = 0.09;
  const Eigen::MatrixXd m(op.matrix());
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_DOUBLE_EQ(m(k, k), hb2 * (2.0 / (hx * hx) + 2.0 / (hy * hy)) + 0.5);
    const auto idx = g.multi_index(k);
    const std::size_t right = g.index((idx[0] + 1) % 6, idx[1]);
    const std::size_t up = g.index(idx[0], (idx[1] + 1) % 4);
    EXPECT_DOUBLE_EQ(m(k, right), -hb2 / (hx * hx));
    EXPECT_DOUBLE_EQ(m(k, up), -hb2 / (hy * hy));
  }
  EXPECT_EQ(op.matrix().nonZeros(), static_cast<long>(5 * g.size()));
}

TEST(Assemble, ExactSymmetry) {
  const ModelSpec m{Geometry::plane(), Potential::polynomial({{0.1, 0.3, 1.0}, {0.0, 0.0, 0.0, 0.0, 1.0}})};
  const Grid g = make_grid(m, 0.3, 1.0, GridPolicy{});
  const DiscreteOperator op = assemble(m, g, 0.3);
  const SparseMatrix t = op.matrix().transpose();
  const SparseMatrix diff = op.matrix() - t;
  double worst = 0.0;
  for (int c = 0; c < diff.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(diff, c); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  EXPECT_EQ(worst, 0.0);
}

TEST(Assemble, RejectsBadInputs) {
  const ModelSpec m = harmonic1d();
  const Grid g = make_uniform_grid(m, {101, 0}, Truncation{Box::interval(-4.0, 4.0), 1.0, 2.0});
  EXPECT_THROW(assemble(m, g, 0.0), ConfigError);
  EXPECT_THROW(assemble(m, g, -0.1), ConfigError);
  const Grid small = make_uniform_grid(m, {101, 0}, Truncation{Box::interval(-1.0, 1.0), 1.0, 2.0});
  try {
    assemble(m, small, 0.1);
    FAIL() << "expected a truncation error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("at ("), std::string::npos) << e.what();
  }
  const ModelSpec circle{Geometry::circle(1.0), Potential::constant(1, 0.0)};
  EXPECT_THROW(assemble(circle, g, 0.1), ConfigError);
}

TEST(Apply, ConstantsOnCircle) {
  const ModelSpec circle{Geometry::circle(2.0), Potential::constant(1, 0.0)};
  const DiscreteOperator op = assemble(circle, make_uniform_grid(circle, {16, 0}), 0.7);
  const Eigen::VectorXd u = Eigen::VectorXd::Ones(16);
  EXPECT_LE(apply(op, u).cwiseAbs().maxCoeff(), 1e-12);

  const ModelSpec lifted{Geometry::circle(2.0), Potential::constant(1, 2.5)};
  const DiscreteOperator op2 = assemble(lifted, make_uniform_grid(lifted, {16, 0}), 0.7);
  EXPECT_LE((apply(op2, u) - 2.5 * u).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(apply(op2, Eigen::VectorXd::Ones(3)), ConfigError);
}

TEST(Apply, QuadraticFormNonNegative) {
  const ModelSpec m{Geometry::rectangle(1.0, 2.0), Potential::polynomial({{0.0, 0.0, 1.0}, {0.5}})};
  const DiscreteOperator op = assemble(m, make_uniform_grid(m, {9, 13}), 0.4);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd u(op.order());
    for (auto& x : u) x = n(rng);
    EXPECT_GE(u.dot(apply(op, u)), 0.0);
  }
  EXPECT_GE(eigenvalues(op)[0], 0.0);
}

TEST(TruncationAudit, SpecExamples) {
  const ModelSpec m = harmonic1d();
  auto audit_for = [](const ModelSpec& model, double lo, double hi, double lambda_max) {
    const Grid g = make_uniform_grid(model, {99, 0}, Truncation{Box::interval(lo, hi), lambda_max, 2.0});
    return truncation_audit(model, g, lambda_max);
  };
  const TruncationAudit a = audit_for(m, -4.0, 4.0, 1.0);
  EXPECT_DOUBLE_EQ(a.min_boundary_potential, 16.0);
  EXPECT_DOUBLE_EQ(a.ratio, 16.0);
  EXPECT_TRUE(a.pass);
  const TruncationAudit b = audit_for(m, -1.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(b.ratio, 1.0);
  EXPECT_FALSE(b.pass);
  const ModelSpec quartic{Geometry::line(), Potential::polynomial({{0.0, 0.0, 0.0, 0.0, 1.0}})};
  const TruncationAudit c = audit_for(quartic, -2.0, 2.0, 4.0);
  EXPECT_DOUBLE_EQ(c.ratio, 4.0);
  EXPECT_TRUE(c.pass);
}

TEST(Assemble, RayleighQuotientSecondOrder) {
  // Ground state e^{-x²/2ħ} of ħ²(-d²) + x² has energy ħ.
  const ModelSpec m = harmonic1d();
  const double hbar = 0.5;
  std::vector<double> spacing;
  std::vector<double> error;
  for (std::size_t n : {49u, 99u, 199u, 399u}) {
    const Grid g = make_uniform_grid(m, {n, 0}, Truncation{Box::interval(-6.0, 6.0), 1.0, 2.0});
    const DiscreteOperator op = assemble(m, g, hbar);
    Eigen::VectorXd u(op.order());
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double x = g.coordinate(k)[0];
      u[k] = std::exp(-x * x / (2.0 * hbar));
    }
    const double rq = u.dot(apply(op, u)) / u.dot(u);
    spacing.push_back(g.axes[0].spacing);
    error.push_back(std::abs(rq - hbar));
  }
  const double slope = loglog_slope(spacing, error);
  EXPECT_GE(slope, 1.7);
  EXPECT_LE(slope, 2.3);
}

TEST(Assemble, LargerBoxNeverRaisesLowLevels) {
  // Same lattice, nested boxes: the smaller operator is a compression of the
  // larger one, so each eigenvalue can only move down as the box grows.
  const ModelSpec m = harmonic1d();
  const double hbar = 0.3;
  const double h = 0.02;
  std::vector<Eigen::VectorXd> levels;
  for (double half : {2.0, 2.5, 3.0, 4.0}) {
    const auto n = static_cast<std::size_t>(std::lround(2.0 * half / h)) - 1;
    const Grid g = make_uniform_grid(m, {n, 0}, Truncation{Box::interval(-half, half), 1.0, 2.0});
    levels.push_back(eigenvalues(assemble(m, g, hbar)).head(10));
  }
  for (std::size_t i = 1; i < levels.size(); ++i) {
    for (int k = 0; k < 10; ++k) EXPECT_LE(levels[i][k], levels[i - 1][k] + 1e-11) << "level " << k;
  }
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(levels.back()[k], hbar * (2 * k + 1), 1e-2) << "level " << k;
}

TEST(Assemble, CoordinateDumpRowMajor) {
  const ModelSpec circle{Geometry::circle(2.0), Potential::constant(1, 1.0)};
  const DiscreteOperator op = assemble(circle, make_uniform_grid(circle, {5, 0}), 1.0);
  std::ostringstream os;
  write_coordinate_text(op, os);
  std::istringstream in(os.str());
  long prev_r = -1, prev_c = -1;
  long r, c;
  double v;
  int lines = 0;
  const Eigen::MatrixXd m(op.matrix());
  while (in >> r >> c >> v) {
    EXPECT_TRUE(r > prev_r || (r == prev_r && c > prev_c));
    EXPECT_EQ(v, m(r, c));
    prev_r = r;
    prev_c = c;
    ++lines;
  }
  EXPECT_EQ(lines, 15);
}
