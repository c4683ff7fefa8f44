#pragma once

// Second-order central-difference discretization of H_ħ = ħ²Δ + V with the
// positive Laplacian sign convention.

#include <Eigen/SparseCore>
#include <iosfwd>
#include <vector>

#include "weyl/grid.hpp"
#include "weyl/model.hpp"

namespace weyl {

using SparseMatrix = Eigen::SparseMatrix<double>;

class DiscreteOperator {
 public:
  DiscreteOperator(SparseMatrix matrix, double hbar, Grid grid, std::vector<double> potential);

  const SparseMatrix& matrix() const { return matrix_; }
  double hbar() const { return hbar_; }
  const Grid& grid() const { return grid_; }
  const std::vector<double>& potential_on_grid() const { return potential_; }
  double cell_volume() const { return grid_.cell_volume(); }
  std::size_t order() const { return static_cast<std::size_t>(matrix_.rows()); }
  // max |entry|
  double max_abs_entry() const;

 private:
  SparseMatrix matrix_;
  double hbar_;
  Grid grid_;
  std::vector<double> potential_;
};

// Rejects ħ <= 0, grids that do not match the geometry, and truncation boxes
// whose boundary potential falls below safety_factor · λ_max.
DiscreteOperator assemble(const ModelSpec& model, const Grid& grid, double hbar);

Eigen::VectorXd apply(const DiscreteOperator& op, const Eigen::VectorXd& u);

struct TruncationAudit {
  double min_boundary_potential = 0.0;
  Point worst_node{0.0, 0.0};
  double ratio = 0.0;  // min boundary V / λ_max
  double threshold = 2.0;
  bool pass = false;

  std::string describe() const;
};

TruncationAudit truncation_audit(const ModelSpec& model, const Grid& grid, double lambda_max,
                                 double threshold = 2.0);

// "row col value" per line, 0-based, sorted row-major, both triangles.
void write_coordinate_text(const DiscreteOperator& op, std::ostream& out);

}  // namespace weyl
