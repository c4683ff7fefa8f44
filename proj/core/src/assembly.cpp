#include "weyl/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "weyl/errors.hpp"

namespace weyl {

namespace {

void check_compatible(const ModelSpec& model, const Grid& grid) {
  if (grid.dim != model.dim()) throw ConfigError("grid dimension differs from model dimension");
  const Geometry& geo = model.geometry;
  for (int a = 0; a < grid.dim; ++a) {
    const AxisGrid& ax = grid.axes[a];
    if (ax.nodes < 3) throw ConfigError("grid axis needs at least 3 nodes");
    if (!(ax.spacing > 0.0)) throw ConfigError("grid spacing must be positive");
    if (ax.periodic != geo.periodic[a]) {
      throw ConfigError("grid periodicity on axis " + std::to_string(a) + " does not match " +
                        to_string(geo.kind));
    }
    if (geo.compact()) {
      const double covered = ax.periodic ? ax.spacing * static_cast<double>(ax.nodes)
                                         : ax.spacing * static_cast<double>(ax.nodes + 1);
      if (std::abs(covered - geo.extent[a]) > 1e-9 * geo.extent[a]) {
        throw ConfigError("grid does not cover the " + to_string(geo.kind) + " extent on axis " +
                          std::to_string(a));
      }
    }
  }
  if (!geo.compact() && !grid.truncation) {
    throw ConfigError("non-compact model needs a truncated grid");
  }
}

}  // namespace

DiscreteOperator::DiscreteOperator(SparseMatrix matrix, double hbar, Grid grid,
                                   std::vector<double> potential)
    : matrix_(std::move(matrix)), hbar_(hbar), grid_(std::move(grid)), potential_(std::move(potential)) {}

double DiscreteOperator::max_abs_entry() const {
  double m = 0.0;
  for (int k = 0; k < matrix_.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(matrix_, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

DiscreteOperator assemble(const ModelSpec& model, const Grid& grid, double hbar) {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw ConfigError("hbar must be positive");
  model.validate();
  check_compatible(model, grid);
  if (grid.truncation) {
    const Truncation& t = *grid.truncation;
    const TruncationAudit audit = truncation_audit(model, grid, t.lambda_max, t.safety_factor);
    if (!audit.pass) {
      throw ConfigError("truncation safety violated: " + audit.describe());
    }
  }

  const std::size_t n = grid.size();
  std::vector<double> potential(n);
  std::array<double, kMaxDim> coupling{0.0, 0.0};
  double kinetic_diag = 0.0;
  for (int a = 0; a < grid.dim; ++a) {
    const double h = grid.axes[a].spacing;
    coupling[a] = -hbar * hbar / (h * h);
    kinetic_diag += 2.0 * hbar * hbar / (h * h);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(n * (1 + 2 * grid.dim));
  for (std::size_t k = 0; k < n; ++k) {
    const auto idx = grid.multi_index(k);
    const double v = model.potential(grid.coordinate(k));
    if (v < 0.0) throw ConfigError("potential is negative at node " + std::to_string(k));
    potential[k] = v;
    triplets.emplace_back(static_cast<int>(k), static_cast<int>(k), kinetic_diag + v);
    for (int a = 0; a < grid.dim; ++a) {
      const AxisGrid& ax = grid.axes[a];
      const long i = static_cast<long>(idx[a]);
      const long last = static_cast<long>(ax.nodes) - 1;
      for (long step : {-1L, 1L}) {
        long j = i + step;
        if (j < 0 || j > last) {
          if (!ax.periodic) continue;  // Dirichlet node eliminated
          j = (j < 0) ? last : 0;
        }
        auto nb = idx;
        nb[a] = static_cast<std::size_t>(j);
        triplets.emplace_back(static_cast<int>(k), static_cast<int>(grid.index(nb[0], nb[1])), coupling[a]);
      }
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();

  // Gershgorin: with V >= 0 every disc lies in [0, ∞).
  Eigen::VectorXd offsum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      if (it.row() == it.col()) {
        diag[it.row()] += it.value();
      } else {
        offsum[it.row()] += std::abs(it.value());
      }
    }
  }
  for (Eigen::Index r = 0; r < diag.size(); ++r) {
    if (diag[r] - offsum[r] < -1e-12 * std::max(1.0, std::abs(diag[r]))) {
      throw ConfigError("assembled operator fails the Gershgorin non-negativity check at row " +
                        std::to_string(r));
    }
  }
  return DiscreteOperator(std::move(m), hbar, grid, std::move(potential));
}

Eigen::VectorXd apply(const DiscreteOperator& op, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != op.order()) {
    throw ConfigError("apply: vector of size " + std::to_string(u.size()) + " for operator of order " +
                      std::to_string(op.order()));
  }
  return op.matrix() * u;
}

std::string TruncationAudit::describe() const {
  std::ostringstream os;
  os << "min boundary V = " << min_boundary_potential << " at (" << worst_node[0] << ", "
     << worst_node[1] << "), ratio = " << ratio << " vs threshold " << threshold
     << (pass ? " (pass)" : " (fail)");
  return os.str();
}

TruncationAudit truncation_audit(const ModelSpec& model, const Grid& grid, double lambda_max,
                                 double threshold) {
  TruncationAudit audit;
  audit.threshold = threshold;
  audit.min_boundary_potential = std::numeric_limits<double>::infinity();

  auto visit = [&](const Point& x) {
    const double v = model.potential(x);
    if (v < audit.min_boundary_potential) {
      audit.min_boundary_potential = v;
      audit.worst_node = x;
    }
  };
  // Ring of eliminated Dirichlet nodes around the unknowns.
  if (grid.dim == 1) {
    const AxisGrid& ax = grid.axes[0];
    visit({ax.coordinate(-1), 0.0});
    visit({ax.coordinate(static_cast<long>(ax.nodes)), 0.0});
  } else {
    const AxisGrid& ax = grid.axes[0];
    const AxisGrid& ay = grid.axes[1];
    const long nx = static_cast<long>(ax.nodes);
    const long ny = static_cast<long>(ay.nodes);
    for (long j = -1; j <= ny; ++j) {
      visit({ax.coordinate(-1), ay.coordinate(j)});
      visit({ax.coordinate(nx), ay.coordinate(j)});
    }
    for (long i = 0; i < nx; ++i) {
      visit({ax.coordinate(i), ay.coordinate(-1)});
      visit({ax.coordinate(i), ay.coordinate(ny)});
    }
  }
  if (lambda_max > 0.0) {
    audit.ratio = audit.min_boundary_potential / lambda_max;
    audit.pass = audit.ratio >= threshold;
  } else {
    audit.ratio = std::numeric_limits<double>::infinity();
    audit.pass = true;
  }
  return audit;
}

void write_coordinate_text(const DiscreteOperator& op, std::ostream& out) {
  // CSC of a symmetric matrix: column c of A is row c of Aᵀ = A.
  const SparseMatrix& m = op.matrix();
  char buf[64];
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << c << ' ' << it.row() << ' ' << buf << '\n';
    }
  }
}

}  // namespace weyl
