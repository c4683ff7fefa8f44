#pragma once

// Sparse symmetric LDLᵀ with diagonal pivots only, used for matrix inertia.
// Symbolic analysis (fill-reducing permutation, elimination tree, column
// counts) is done once per pattern; each numeric factorization takes a shift
// so that inertia(A - sI) can be read off the pivots.

#include <Eigen/SparseCore>
#include <cstddef>
#include <vector>

namespace weyl {

struct Inertia {
  std::size_t negative = 0;
  std::size_t positive = 0;
  double min_abs_pivot = 0.0;
  bool breakdown = false;  // some |pivot| fell below the tolerance
  std::size_t breakdown_index = 0;
};

class SymbolicLdlt {
 public:
  // Reads the upper triangle of `a` (which must be square and symmetric).
  explicit SymbolicLdlt(const Eigen::SparseMatrix<double>& a);

  // Factorizes P(A - shift·I)Pᵀ and returns the pivot signs. Stops at the
  // first pivot with |d| < pivot_tolerance and flags a breakdown.
  Inertia factorize(double shift, double pivot_tolerance) const;

  std::size_t order() const { return n_; }
  std::size_t factor_nonzeros() const { return lp_.empty() ? 0 : static_cast<std::size_t>(lp_.back()); }

 private:
  std::size_t n_ = 0;
  // Upper triangle of the permuted matrix, CSC.
  std::vector<int> ap_;
  std::vector<int> ai_;
  std::vector<double> ax_;
  // Elimination tree and column pointers of L.
  std::vector<int> parent_;
  std::vector<int> lp_;
};

// Sturm-sequence count of eigenvalues of the symmetric tridiagonal matrix
// (diag, off) below x. Flags a breakdown when some |q_i| < pivot_tolerance.
Inertia sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x,
                    double pivot_tolerance);

}  // namespace weyl
