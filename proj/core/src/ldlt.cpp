#include "weyl/ldlt.hpp"

#include <Eigen/OrderingMethods>
#include <cmath>
#include <limits>

#include "weyl/errors.hpp"

namespace weyl {

SymbolicLdlt::SymbolicLdlt(const Eigen::SparseMatrix<double>& a) {
  if (a.rows() != a.cols()) throw ConfigError("LDLT needs a square matrix");
  n_ = static_cast<std::size_t>(a.rows());
  const int n = static_cast<int>(n_);

  // Fill-reducing ordering on the full symmetric pattern, same convention as
  // Eigen's simplicial factorizations.
  Eigen::SparseMatrix<double> full(n, n);
  full = a.selfadjointView<Eigen::Upper>();
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> pinv;
  Eigen::AMDOrdering<int> amd;
  amd(full, pinv);
  const Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> perm = pinv.inverse();

  Eigen::SparseMatrix<double> upper(n, n);
  upper.selfadjointView<Eigen::Upper>() = a.selfadjointView<Eigen::Upper>().twistedBy(perm);
  upper.makeCompressed();

  ap_.assign(upper.outerIndexPtr(), upper.outerIndexPtr() + n + 1);
  ai_.assign(upper.innerIndexPtr(), upper.innerIndexPtr() + upper.nonZeros());
  ax_.assign(upper.valuePtr(), upper.valuePtr() + upper.nonZeros());

  // Elimination tree and nonzero counts per column of L.
  parent_.assign(n, -1);
  std::vector<int> flag(n, -1);
  std::vector<int> lnz(n, 0);
  for (int k = 0; k < n; ++k) {
    flag[k] = k;
    for (int p = ap_[k]; p < ap_[k + 1]; ++p) {
      int i = ai_[p];
      if (i >= k) continue;
      for (; flag[i] != k; i = parent_[i]) {
        if (parent_[i] == -1) parent_[i] = k;
        ++lnz[i];
        flag[i] = k;
      }
    }
  }
  lp_.assign(n + 1, 0);
  for (int k = 0; k < n; ++k) lp_[k + 1] = lp_[k] + lnz[k];
}

Inertia SymbolicLdlt::factorize(double shift, double pivot_tolerance) const {
  const int n = static_cast<int>(n_);
  Inertia result;
  result.min_abs_pivot = std::numeric_limits<double>::infinity();
  if (n == 0) return result;

  const std::size_t nnz = static_cast<std::size_t>(lp_[n]);
  std::vector<int> li(nnz);
  std::vector<double> lx(nnz);
  std::vector<double> d(n);
  std::vector<double> y(n, 0.0);
  std::vector<int> pattern(n);
  std::vector<int> flag(n, -1);
  std::vector<int> lnz(n, 0);

  // Up-looking: row k of L from a sparse triangular solve along the etree.
  for (int k = 0; k < n; ++k) {
    int top = n;
    flag[k] = k;
    for (int p = ap_[k]; p < ap_[k + 1]; ++p) {
      int i = ai_[p];
      if (i > k) continue;
      y[i] += ax_[p];
      int len = 0;
      for (; flag[i] != k; i = parent_[i]) {
        pattern[len++] = i;
        flag[i] = k;
      }
      while (len > 0) pattern[--top] = pattern[--len];
    }
    double dk = y[k] - shift;
    y[k] = 0.0;
    for (; top < n; ++top) {
      const int i = pattern[top];
      const double yi = y[i];
      y[i] = 0.0;
      const int end = lp_[i] + lnz[i];
      for (int p = lp_[i]; p < end; ++p) y[li[p]] -= lx[p] * yi;
      const double lki = yi / d[i];
      dk -= lki * yi;
      li[end] = k;
      lx[end] = lki;
      ++lnz[i];
    }
    d[k] = dk;
    const double mag = std::abs(dk);
    if (mag < result.min_abs_pivot) result.min_abs_pivot = mag;
    if (!(mag >= pivot_tolerance)) {
      result.breakdown = true;
      result.breakdown_index = static_cast<std::size_t>(k);
      return result;
    }
    if (dk < 0.0) {
      ++result.negative;
    } else {
      ++result.positive;
    }
  }
  return result;
}

Inertia sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x,
                    double pivot_tolerance) {
  Inertia result;
  result.min_abs_pivot = std::numeric_limits<double>::infinity();
  double q = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    q = (i == 0) ? diag[0] - x : diag[i] - x - off[i - 1] * off[i - 1] / q;
    const double mag = std::abs(q);
    if (mag < result.min_abs_pivot) result.min_abs_pivot = mag;
    if (!(mag >= pivot_tolerance)) {
      result.breakdown = true;
      result.breakdown_index = i;
      return result;
    }
    if (q < 0.0) {
      ++result.negative;
    } else {
      ++result.positive;
    }
  }
  return result;
}

}  // namespace weyl
