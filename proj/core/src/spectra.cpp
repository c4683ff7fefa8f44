#include "weyl/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "weyl/errors.hpp"

namespace weyl {

namespace {

double infinity_norm(const SparseMatrix& a) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(a.rows());
  for (int c = 0; c < a.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) rows[it.row()] += std::abs(it.value());
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

void check_dense_guard(Eigen::Index order) {
  if (static_cast<std::size_t>(order) > kDenseOrderGuard) {
    throw ConfigError("dense eigensolve refused: order " + std::to_string(order) + " exceeds " +
                      std::to_string(kDenseOrderGuard));
  }
}

}  // namespace

std::string to_string(CountingMethod method) {
  switch (method) {
    case CountingMethod::SturmTridiagonal: return "SturmTridiagonal";
    case CountingMethod::InertiaLDLT: return "InertiaLDLT";
    case CountingMethod::DenseOracle: return "DenseOracle";
  }
  return "?";
}

std::string to_string(LemmaVerdict verdict) {
  switch (verdict) {
    case LemmaVerdict::Pass: return "PASS";
    case LemmaVerdict::Fail: return "FAIL";
    case LemmaVerdict::PreconditionFailed: return "precondition-failed";
  }
  return "?";
}

double tie_break_shift(double lambda) { return 1e-9 * std::max(1.0, std::abs(lambda)); }

InertiaCounter::InertiaCounter(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw ConfigError("counting needs a square matrix");
  order_ = static_cast<std::size_t>(a.rows());
  norm_ = infinity_norm(a);

  tridiagonal_ = true;
  for (int c = 0; c < a.outerSize() && tridiagonal_; ++c) {
    for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
      if (std::abs(it.row() - it.col()) > 1) {
        tridiagonal_ = false;
        break;
      }
    }
  }
  if (tridiagonal_) {
    diag_.assign(order_, 0.0);
    off_.assign(order_ > 0 ? order_ - 1 : 0, 0.0);
    for (int c = 0; c < a.outerSize(); ++c) {
      for (SparseMatrix::InnerIterator it(a, c); it; ++it) {
        if (it.row() == it.col()) {
          diag_[c] = it.value();
        } else if (it.row() + 1 == it.col()) {
          off_[it.row()] = it.value();  // upper entry (row, row+1)
        }
      }
    }
  } else {
    ldlt_ = std::make_unique<SymbolicLdlt>(a);
  }
}

Inertia InertiaCounter::inertia_at(double x) const {
  const double tol = kPivotTolerance * std::max(norm_, std::numeric_limits<double>::min());
  return tridiagonal_ ? sturm_count(diag_, off_, x, tol) : ldlt_->factorize(x, tol);
}

CountingResult InertiaCounter::count(double lambda) const {
  CountingResult r;
  r.lambda = lambda;
  r.method = tridiagonal_ ? CountingMethod::SturmTridiagonal : CountingMethod::InertiaLDLT;
  double sigma = tie_break_shift(lambda);
  for (int attempt = 0; attempt <= kMaxShiftRetries; ++attempt) {
    const Inertia in = inertia_at(lambda - sigma);
    r.shift_perturbation = sigma;
    r.min_abs_pivot = in.min_abs_pivot;
    r.retries = attempt;
    if (!in.breakdown) {
      r.count = in.negative;
      return r;
    }
    sigma *= 2.0;
  }
  std::ostringstream os;
  os << "inertia factorization broke down at lambda = " << lambda << " after " << kMaxShiftRetries
     << " shift doublings (last sigma = " << r.shift_perturbation << ", smallest |pivot| = " << r.min_abs_pivot
     << ", ||A|| = " << norm_ << ", order = " << order_ << ")";
  throw NumericalError(os.str());
}

CountingResult count_below(const SparseMatrix& a, double lambda) { return InertiaCounter(a).count(lambda); }

CountingResult count_below(const DiscreteOperator& op, double lambda) { return count_below(op.matrix(), lambda); }

CountingResult dense_count_oracle(const Eigen::MatrixXd& a, double lambda) {
  check_dense_guard(a.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
  CountingResult r;
  r.lambda = lambda;
  r.method = CountingMethod::DenseOracle;
  r.shift_perturbation = tie_break_shift(lambda);
  const double threshold = lambda - r.shift_perturbation;
  const Eigen::VectorXd& ev = solver.eigenvalues();
  r.count = static_cast<std::size_t>((ev.array() < threshold).count());
  r.min_abs_pivot = ev.size() ? (ev.array() - threshold).abs().minCoeff() : 0.0;
  return r;
}

CountingResult dense_count_oracle(const SparseMatrix& a, double lambda) {
  check_dense_guard(a.rows());
  return dense_count_oracle(Eigen::MatrixXd(a), lambda);
}

CountingResult dense_count_oracle(const DiscreteOperator& op, double lambda) {
  return dense_count_oracle(op.matrix(), lambda);
}

SpectralProjector spectral_projector(const SparseMatrix& a, double lambda) {
  check_dense_guard(a.rows());
  const CountingResult counted = count_below(a, lambda);
  if (counted.count > kProjectorRankGuard) {
    throw ConfigError("spectral projector refused: rank " + std::to_string(counted.count) + " exceeds " +
                      std::to_string(kProjectorRankGuard));
  }
  const Eigen::MatrixXd dense(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("projector eigensolver did not converge (order " + std::to_string(a.rows()) + ")");
  }
  const double threshold = lambda - counted.shift_perturbation;
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const auto rank = static_cast<Eigen::Index>((ev.array() < threshold).count());

  SpectralProjector p;
  p.lambda = lambda;
  p.basis = solver.eigenvectors().leftCols(rank);
  p.ritz_values = ev.head(rank);
  if (rank > 0) {
    const Eigen::MatrixXd gram = p.basis.transpose() * p.basis;
    p.max_orthogonality_error = (gram - Eigen::MatrixXd::Identity(rank, rank)).cwiseAbs().maxCoeff();
    const Eigen::MatrixXd residual = dense * p.basis - p.basis * p.ritz_values.asDiagonal();
    p.max_residual = residual.colwise().norm().maxCoeff();
  }
  if (static_cast<std::size_t>(rank) != counted.count) {
    std::ostringstream os;
    os << "projector rank " << rank << " disagrees with inertia count " << counted.count << " at lambda = " << lambda;
    throw NumericalError(os.str());
  }
  return p;
}

SpectralProjector spectral_projector(const DiscreteOperator& op, double lambda) {
  return spectral_projector(op.matrix(), lambda);
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
  check_dense_guard(a.rows());
  if (a.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
  return solver.eigenvalues()[0];
}

RankLemmaResult rank_lemma_check(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double mu) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw ConfigError("rank lemma needs square matrices of equal order");
  }
  RankLemmaResult r;
  r.min_eig_sum = min_eigenvalue(a + b);
  if (r.min_eig_sum < mu - 1e-12) {
    r.verdict = LemmaVerdict::PreconditionFailed;
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bs(b, Eigen::EigenvaluesOnly);
  if (bs.info() != Eigen::Success) throw NumericalError("dense eigensolver did not converge");
  const Eigen::VectorXd sv = bs.eigenvalues().cwiseAbs();
  const double norm_b = sv.size() ? sv.maxCoeff() : 0.0;
  r.rank_b = norm_b > 0.0 ? static_cast<std::size_t>((sv.array() > 1e-10 * norm_b).count()) : 0;
  r.count = dense_count_oracle(a, mu).count;
  r.verdict = r.count <= r.rank_b ? LemmaVerdict::Pass : LemmaVerdict::Fail;
  return r;
}

}  // namespace weyl
