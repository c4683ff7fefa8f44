#pragma once

// Partitions of unity φ² + ψ² = 1 adapted to an equivalent pair, the IMS
// localization identity on discrete operators, double-commutator bounds and
// the localized operator inequalities behind the relative counting bound.

#include <span>
#include <string>
#include <vector>

#include "weyl/assembly.hpp"
#include "weyl/model.hpp"
#include "weyl/spectra.hpp"

namespace weyl {

// Analytic plateau profile: φ = 1 on `plateau`, quintic ramps of `width`
// per axis, 0 outside plateau + width. Tensor product over axes.
struct PartitionProfile {
  Box plateau;
  double width = 1.0;

  double phi(const Point& x) const;
  // |dφ|² and |dψ|² with ψ = √(1 - φ²).
  double grad_phi_sq(const Point& x) const;
  double grad_psi_sq(const Point& x) const;
  Box support() const { return plateau.expanded(width); }
};

struct PartitionOfUnity {
  std::vector<double> phi;
  std::vector<double> psi;
  std::vector<double> grad_phi_sq;  // continuum |dφ|² at nodes
  std::vector<double> grad_psi_sq;
  double grad_sup_phi_sq = 0.0;
  double grad_sup_psi_sq = 0.0;
  double grad_sup_sum = 0.0;  // sup(|dφ|² + |dψ|²)
  Box region;                 // U
  PartitionProfile profile;
  double lambda = 0.0;
  double c = 0.0;
};

inline constexpr double kGradientSafety = 1.1;

// c = 1.1 · max(sup(|dφ|² + |dψ|²), 2 sup|dφ|², 2 sup|dψ|²): dominates the sum
// of both double commutators and each one separately at (c/2)ħ².
double commutator_constant(double sup_phi_sq, double sup_psi_sq, double sup_sum);

// Samples `profile` on `grid` and fills the gradient suprema and c.
PartitionOfUnity sample_partition(const PartitionProfile& profile, const Grid& grid, const Box& region,
                                  double lambda);

struct PartitionPair {
  PartitionOfUnity a;
  PartitionOfUnity b;
};

// φ = 1 on the sublevel box of {V <= λ}, ramping to 0 strictly inside U on
// both grids; both members carry the larger of the two constants. Requires at
// least 4 grid cells between the sublevel box and ∂U.
PartitionPair build_partition(const EquivalentPair& pair, const Grid& grid_a, const Grid& grid_b);
PartitionPair build_partition(const EquivalentPair& pair, const Grid& grid_a, const Grid& grid_b, double lambda);

struct PartitionAudit {
  double max_unity_error = 0.0;       // max |φ² + ψ² - 1|
  bool support_in_region = true;      // φ = 0 outside U
  bool psi_off_sublevel = true;       // ψ = 0 where V <= λ
  bool matched = true;                // φ_a = φ_b on shared nodes (pair audit only)
  std::string detail;

  bool ok() const { return max_unity_error <= 1e-12 && support_in_region && psi_off_sublevel && matched; }
};

PartitionAudit audit_partition(const PartitionOfUnity& pou, const Grid& grid, const Potential& v);
PartitionAudit audit_partition_pair(const PartitionPair& pou, const Grid& grid_a, const Grid& grid_b,
                                    const Potential& va, const Potential& vb);

// max |H - (φHφ + ψHψ + ½[φ,[φ,H]] + ½[ψ,[ψ,H]])| with φ, ψ acting as
// diagonal multiplications.
double ims_residual(const SparseMatrix& h, std::span<const double> phi, std::span<const double> psi);
double ims_residual(const DiscreteOperator& op, const PartitionOfUnity& pou);

// ½[f,[f,H]] as a sparse matrix.
SparseMatrix double_commutator(const SparseMatrix& h, std::span<const double> f);

struct CommutatorReport {
  double max_deviation = 0.0;  // max_i |row_i(½[φ,[φ,H]]) + ħ²|dφ(x_i)|²|
  double norm_phi = 0.0;       // row-sum bound on ‖½[φ,[φ,H]]‖
  double norm_psi = 0.0;
  double norm_sum = 0.0;       // ‖½[φ,[φ,H]] + ½[ψ,[ψ,H]]‖ row-sum bound
  double limit = 0.0;          // (c/2)ħ²
  bool bound_holds = false;    // norm_phi, norm_psi < (c/2)ħ² and norm_sum <= cħ²
};

CommutatorReport commutator_check(const DiscreteOperator& op, const PartitionOfUnity& pou);

struct RefinementStudy {
  std::vector<double> spacings;
  std::vector<double> deviations;
  double slope = 0.0;
  bool flagged = false;  // slope outside [1.5, 2.5]
};

// Commutator deviation for one profile on a sequence of grids of one model.
RefinementStudy commutator_refinement(const ModelSpec& model, const PartitionProfile& profile, double hbar,
                                      const std::vector<Grid>& grids, const Box& region, double lambda);

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y, double* r_squared = nullptr);

struct LocalizedBoundReport {
  double lambda = 0.0;
  double c_hbar_sq = 0.0;
  double min_eig_projected = 0.0;   // min eig(H₁ + λP₁)
  double min_eig_transported = 0.0; // min eig(H₂ + λφ₂P₁φ₂)
  double psi_margin = 0.0;          // min eig of (H₂ - λ) on supp ψ₂
  bool projected_ok = false;        // >= λ - 1e-10
  bool transported_ok = false;      // >= λ - cħ² - 1e-10
  bool vacuous = false;             // cħ² >= λ
  RankLemmaResult lemma;            // A = H₂, B = λφ₂P₁φ₂, μ = λ - cħ²
};

// Dense checks; orders are limited by the dense guard.
LocalizedBoundReport localized_bound_check(const DiscreteOperator& op1, const PartitionOfUnity& pou1,
                                           const SpectralProjector& projector1, const DiscreteOperator& op2,
                                           const PartitionOfUnity& pou2);

}  // namespace weyl
