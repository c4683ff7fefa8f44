#pragma once

// Spectral counting N(A, λ) = #{eigenvalues < λ} by Sylvester inertia, a
// dense eigendecomposition oracle, spectral projectors and the rank lemma.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "weyl/assembly.hpp"
#include "weyl/ldlt.hpp"

namespace weyl {

enum class CountingMethod { SturmTridiagonal, InertiaLDLT, DenseOracle };

std::string to_string(CountingMethod method);

struct CountingResult {
  std::size_t count = 0;
  double lambda = 0.0;
  CountingMethod method = CountingMethod::InertiaLDLT;
  double shift_perturbation = 0.0;  // σ actually used: counts eigenvalues < λ - σ
  double min_abs_pivot = 0.0;
  int retries = 0;
};

// Tie-breaking shift σ = 1e-9·max(1, |λ|).
double tie_break_shift(double lambda);

inline constexpr double kPivotTolerance = 1e-14;  // relative to ‖A‖
inline constexpr int kMaxShiftRetries = 8;
inline constexpr std::size_t kDenseOrderGuard = 4000;
inline constexpr std::size_t kProjectorRankGuard = 500;

// Reusable counter for one matrix: symbolic analysis once, one numeric
// factorization per λ. Tridiagonal matrices use the Sturm recurrence.
// count() is const and allocates its own workspace, so concurrent calls are
// safe.
class InertiaCounter {
 public:
  explicit InertiaCounter(const SparseMatrix& a);

  CountingResult count(double lambda) const;
  // Count below x exactly (no tie-break shift); breakdown reported, not retried.
  Inertia inertia_at(double x) const;

  bool tridiagonal() const { return tridiagonal_; }
  double norm() const { return norm_; }
  std::size_t order() const { return order_; }

 private:
  std::size_t order_ = 0;
  bool tridiagonal_ = false;
  double norm_ = 0.0;
  std::vector<double> diag_;
  std::vector<double> off_;
  std::unique_ptr<SymbolicLdlt> ldlt_;
};

CountingResult count_below(const SparseMatrix& a, double lambda);
CountingResult count_below(const DiscreteOperator& op, double lambda);

// Full eigendecomposition, strict count below λ - σ. Order guard 4000.
CountingResult dense_count_oracle(const Eigen::MatrixXd& a, double lambda);
CountingResult dense_count_oracle(const SparseMatrix& a, double lambda);
CountingResult dense_count_oracle(const DiscreteOperator& op, double lambda);

struct SpectralProjector {
  Eigen::MatrixXd basis;        // columns: orthonormal eigenvectors
  Eigen::VectorXd ritz_values;  // matching eigenvalues, all < λ - σ
  double lambda = 0.0;
  double max_orthogonality_error = 0.0;
  double max_residual = 0.0;  // max ‖Av - μv‖

  std::size_t rank() const { return static_cast<std::size_t>(basis.cols()); }
  Eigen::MatrixXd matrix() const { return basis * basis.transpose(); }
};

SpectralProjector spectral_projector(const SparseMatrix& a, double lambda);
SpectralProjector spectral_projector(const DiscreteOperator& op, double lambda);

enum class LemmaVerdict { Pass, Fail, PreconditionFailed };

std::string to_string(LemmaVerdict verdict);

struct RankLemmaResult {
  LemmaVerdict verdict = LemmaVerdict::Pass;
  std::size_t count = 0;   // N(A, μ)
  std::size_t rank_b = 0;  // numerical rank of B
  double min_eig_sum = 0.0;
};

// Checks N(A, μ) <= rank(B) given A + B >= μ (verified densely).
RankLemmaResult rank_lemma_check(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double mu);

// Smallest eigenvalue of a dense symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& a);

}  // namespace weyl
