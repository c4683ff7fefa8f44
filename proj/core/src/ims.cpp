#include "weyl/ims.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "weyl/errors.hpp"
#include "weyl/ramp.hpp"

namespace weyl {

namespace {

Plateau1D axis_ramp(const PartitionProfile& p, int a) { return Plateau1D{p.plateau.lo[a], p.plateau.hi[a], p.width}; }

Eigen::VectorXd as_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double max_abs(const SparseMatrix& m) {
  double r = 0.0;
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) r = std::max(r, std::abs(it.value()));
  }
  return r;
}

Eigen::VectorXd row_sums(const SparseMatrix& m, bool absolute) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(m.rows());
  for (int c = 0; c < m.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(m, c); it; ++it) s[it.row()] += absolute ? std::abs(it.value()) : it.value();
  }
  return s;
}

// Dense sample of the profile's support box, for grid-independent suprema.
void profile_suprema(const PartitionProfile& profile, int dim, double& sup_phi, double& sup_psi, double& sup_sum) {
  const Box s = profile.support();
  const int n = dim == 1 ? 20001 : 401;
  const int ny = dim == 1 ? 1 : n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < ny; ++j) {
      Point x{s.lo[0] + s.width(0) * i / (n - 1), 0.0};
      if (dim == 2) x[1] = s.lo[1] + s.width(1) * j / (n - 1);
      const double gp = profile.grad_phi_sq(x);
      const double gs = profile.grad_psi_sq(x);
      sup_phi = std::max(sup_phi, gp);
      sup_psi = std::max(sup_psi, gs);
      sup_sum = std::max(sup_sum, gp + gs);
    }
  }
}

}  // namespace

double PartitionProfile::phi(const Point& x) const {
  double v = 1.0;
  for (int a = 0; a < plateau.dim; ++a) v *= axis_ramp(*this, a).value(x[a]);
  return v;
}

double PartitionProfile::grad_phi_sq(const Point& x) const {
  double g = 0.0;
  for (int a = 0; a < plateau.dim; ++a) {
    double partial = axis_ramp(*this, a).derivative(x[a]);
    for (int b = 0; b < plateau.dim; ++b) {
      if (b != a) partial *= axis_ramp(*this, b).value(x[b]);
    }
    g += partial * partial;
  }
  return g;
}

double PartitionProfile::grad_psi_sq(const Point& x) const {
  // ψ = √(1 - φ²) gives |dψ|² = φ²|dφ|² / (1 - φ²); the limit at φ = 1 is 0
  // because the quintic ramp is flat to second order there.
  const double f = phi(x);
  const double rest = (1.0 - f) * (1.0 + f);
  if (rest <= 0.0) return 0.0;
  return f * f * grad_phi_sq(x) / rest;
}

double commutator_constant(double sup_phi_sq, double sup_psi_sq, double sup_sum) {
  return kGradientSafety * std::max({sup_sum, 2.0 * sup_phi_sq, 2.0 * sup_psi_sq});
}

PartitionOfUnity sample_partition(const PartitionProfile& profile, const Grid& grid, const Box& region, double lambda) {
  PartitionOfUnity pou;
  pou.profile = profile;
  pou.region = region;
  pou.lambda = lambda;
  const std::size_t n = grid.size();
  pou.phi.resize(n);
  pou.psi.resize(n);
  pou.grad_phi_sq.resize(n);
  pou.grad_psi_sq.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point x = grid.coordinate(k);
    const double f = profile.phi(x);
    pou.phi[k] = f;
    pou.psi[k] = std::sqrt(std::max(0.0, 1.0 - f * f));
    pou.grad_phi_sq[k] = profile.grad_phi_sq(x);
    pou.grad_psi_sq[k] = profile.grad_psi_sq(x);
    pou.grad_sup_phi_sq = std::max(pou.grad_sup_phi_sq, pou.grad_phi_sq[k]);
    pou.grad_sup_psi_sq = std::max(pou.grad_sup_psi_sq, pou.grad_psi_sq[k]);
    pou.grad_sup_sum = std::max(pou.grad_sup_sum, pou.grad_phi_sq[k] + pou.grad_psi_sq[k]);
  }
  profile_suprema(profile, grid.dim, pou.grad_sup_phi_sq, pou.grad_sup_psi_sq, pou.grad_sup_sum);
  pou.c = commutator_constant(pou.grad_sup_phi_sq, pou.grad_sup_psi_sq, pou.grad_sup_sum);
  return pou;
}

PartitionPair build_partition(const EquivalentPair& pair, const Grid& grid_a, const Grid& grid_b) {
  return build_partition(pair, grid_a, grid_b, pair.lambda);
}

PartitionPair build_partition(const EquivalentPair& pair, const Grid& grid_a, const Grid& grid_b, double lambda) {
  const int dim = pair.region.dim;
  if (!pair.region.is_bounded() || pair.region.is_empty()) {
    throw ConfigError("partition needs a bounded identification region U");
  }
  Box hull = Box::empty(dim);
  for (const ModelSpec* m : {&pair.model_a, &pair.model_b}) {
    const Box b = sublevel_set_bound(*m, lambda);
    if (b.is_empty()) continue;
    if (!b.is_bounded()) throw ConfigError("sublevel set at lambda is unbounded; pair is not lambda-equivalent");
    for (int a = 0; a < dim; ++a) {
      hull.lo[a] = std::min(hull.lo[a], b.lo[a]);
      hull.hi[a] = std::max(hull.hi[a], b.hi[a]);
    }
  }
  if (hull.is_empty()) hull = Box::centered(dim, 0.0);

  const double band = pair.region.clearance(hull);
  double hmax = 0.0;
  for (const Grid* g : {&grid_a, &grid_b}) {
    for (int a = 0; a < g->dim; ++a) hmax = std::max(hmax, g->axes[a].spacing);
  }
  if (!(band >= 4.0 * hmax)) {
    std::ostringstream os;
    os << "band between the sublevel box " << hull.to_string() << " and U " << pair.region.to_string()
       << " is " << band << "; need at least 4 grid cells (" << 4.0 * hmax
       << "); enlarge the margin by at least " << (4.0 * hmax - band);
    throw ConfigError(os.str());
  }

  PartitionProfile profile;
  profile.plateau = hull;
  profile.width = 0.75 * band;

  PartitionPair p;
  p.a = sample_partition(profile, grid_a, pair.region, lambda);
  p.b = sample_partition(profile, grid_b, pair.region, lambda);
  const double c = std::max(p.a.c, p.b.c);
  p.a.c = c;
  p.b.c = c;
  return p;
}

PartitionAudit audit_partition(const PartitionOfUnity& pou, const Grid& grid, const Potential& v) {
  PartitionAudit audit;
  if (pou.phi.size() != grid.size() || pou.psi.size() != grid.size()) {
    throw ConfigError("partition is not sampled on this grid");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double f = pou.phi[k];
    const double g = pou.psi[k];
    audit.max_unity_error = std::max(audit.max_unity_error, std::abs(f * f + g * g - 1.0));
    const Point x = grid.coordinate(k);
    if (f != 0.0 && !pou.region.contains_strictly(x)) {
      if (audit.support_in_region) audit.detail = "phi != 0 outside U at node " + std::to_string(k);
      audit.support_in_region = false;
    }
    if (g != 0.0 && v(x) <= pou.lambda) {
      if (audit.psi_off_sublevel) audit.detail = "psi != 0 where V <= lambda at node " + std::to_string(k);
      audit.psi_off_sublevel = false;
    }
  }
  return audit;
}

PartitionAudit audit_partition_pair(const PartitionPair& pou, const Grid& grid_a, const Grid& grid_b,
                                    const Potential& va, const Potential& vb) {
  PartitionAudit a = audit_partition(pou.a, grid_a, va);
  const PartitionAudit b = audit_partition(pou.b, grid_b, vb);
  a.max_unity_error = std::max(a.max_unity_error, b.max_unity_error);
  a.support_in_region = a.support_in_region && b.support_in_region;
  a.psi_off_sublevel = a.psi_off_sublevel && b.psi_off_sublevel;
  if (a.detail.empty()) a.detail = b.detail;
  const std::vector<long> map = shared_node_map(grid_a, grid_b, pou.a.region);
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (map[k] < 0) {
      if (pou.a.region.contains(grid_a.coordinate(k))) {
        a.matched = false;
        if (a.detail.empty()) a.detail = "node of U missing on grid b";
      }
      continue;
    }
    if (pou.a.phi[k] != pou.b.phi[static_cast<std::size_t>(map[k])]) {
      if (a.matched) a.detail = "phi_a != phi_b on shared node " + std::to_string(k);
      a.matched = false;
    }
  }
  return a;
}

SparseMatrix double_commutator(const SparseMatrix& h, std::span<const double> f) {
  if (static_cast<Eigen::Index>(f.size()) != h.rows()) throw ConfigError("commutator: size mismatch");
  const Eigen::VectorXd fv = as_vector(f);
  const Eigen::VectorXd f2 = fv.cwiseProduct(fv);
  // [f,[f,H]] = f²H - 2fHf + Hf²
  SparseMatrix left = f2.asDiagonal() * h;
  SparseMatrix mid = fv.asDiagonal() * h * fv.asDiagonal();
  SparseMatrix right = h * f2.asDiagonal();
  SparseMatrix k = 0.5 * (left - 2.0 * mid + right);
  return k;
}

double ims_residual(const SparseMatrix& h, std::span<const double> phi, std::span<const double> psi) {
  if (static_cast<Eigen::Index>(phi.size()) != h.rows() || static_cast<Eigen::Index>(psi.size()) != h.rows()) {
    throw ConfigError("IMS residual: partition not sampled on the operator grid");
  }
  const Eigen::VectorXd p = as_vector(phi);
  const Eigen::VectorXd q = as_vector(psi);
  SparseMatrix phi_h_phi = p.asDiagonal() * h * p.asDiagonal();
  SparseMatrix psi_h_psi = q.asDiagonal() * h * q.asDiagonal();
  SparseMatrix rebuilt = phi_h_phi + psi_h_psi + double_commutator(h, phi) + double_commutator(h, psi);
  SparseMatrix residual = h - rebuilt;
  return max_abs(residual);
}

double ims_residual(const DiscreteOperator& op, const PartitionOfUnity& pou) {
  return ims_residual(op.matrix(), pou.phi, pou.psi);
}

CommutatorReport commutator_check(const DiscreteOperator& op, const PartitionOfUnity& pou) {
  if (pou.phi.size() != op.order()) throw ConfigError("commutator check: partition not sampled on the operator grid");
  const double hbar2 = op.hbar() * op.hbar();
  const SparseMatrix k_phi = double_commutator(op.matrix(), pou.phi);
  const SparseMatrix k_psi = double_commutator(op.matrix(), pou.psi);
  const Eigen::VectorXd rows = row_sums(k_phi, false);

  CommutatorReport r;
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    r.max_deviation = std::max(r.max_deviation, std::abs(rows[i] + hbar2 * pou.grad_phi_sq[static_cast<std::size_t>(i)]));
  }
  r.norm_phi = row_sums(k_phi, true).maxCoeff();
  r.norm_psi = row_sums(k_psi, true).maxCoeff();
  const SparseMatrix both = k_phi + k_psi;
  r.norm_sum = row_sums(both, true).maxCoeff();
  r.limit = 0.5 * pou.c * hbar2;
  r.bound_holds = r.norm_phi < r.limit && r.norm_psi < r.limit && r.norm_sum <= 2.0 * r.limit;
  return r;
}

double loglog_slope(std::span<const double> x, std::span<const double> y, double* r_squared) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("log-log fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  const double slope = cov / vx;
  if (r_squared) *r_squared = vy > 0.0 ? (cov * cov) / (vx * vy) : 1.0;
  return slope;
}

RefinementStudy commutator_refinement(const ModelSpec& model, const PartitionProfile& profile, double hbar,
                                      const std::vector<Grid>& grids, const Box& region, double lambda) {
  if (grids.size() < 3) throw ConfigError("commutator refinement needs at least 3 grids");
  RefinementStudy study;
  for (const Grid& g : grids) {
    const DiscreteOperator op = assemble(model, g, hbar);
    const PartitionOfUnity pou = sample_partition(profile, g, region, lambda);
    study.spacings.push_back(g.min_spacing());
    study.deviations.push_back(commutator_check(op, pou).max_deviation);
  }
  study.slope = loglog_slope(study.spacings, study.deviations);
  study.flagged = !(study.slope >= 1.5 && study.slope <= 2.5);
  return study;
}

LocalizedBoundReport localized_bound_check(const DiscreteOperator& op1, const PartitionOfUnity& pou1,
                                           const SpectralProjector& projector1, const DiscreteOperator& op2,
                                           const PartitionOfUnity& pou2) {
  if (std::abs(projector1.lambda - pou1.lambda) > 1e-12 * std::max(1.0, std::abs(pou1.lambda))) {
    throw ConfigError("projector and partition are built at different lambda");
  }
  LocalizedBoundReport r;
  r.lambda = pou1.lambda;
  const double lambda = r.lambda;
  const double hbar = op2.hbar();
  r.c_hbar_sq = pou2.c * hbar * hbar;
  r.vacuous = r.c_hbar_sq >= lambda;

  const Eigen::MatrixXd h1(op1.matrix());
  const Eigen::MatrixXd& q = projector1.basis;
  r.min_eig_projected = min_eigenvalue(h1 + lambda * (q * q.transpose()));
  r.projected_ok = r.min_eig_projected >= lambda - 1e-10;

  // φ₁P₁φ₁ carried to grid 2 by node identification on U, zero elsewhere.
  const std::vector<long> map = shared_node_map(op1.grid(), op2.grid(), pou1.region);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(op2.order()), q.cols());
  for (std::size_t k = 0; k < map.size(); ++k) {
    if (map[k] < 0 || pou1.phi[k] == 0.0) continue;
    w.row(map[k]) = pou1.phi[k] * q.row(static_cast<Eigen::Index>(k));
  }
  const Eigen::MatrixXd h2(op2.matrix());
  const Eigen::MatrixXd b = lambda * (w * w.transpose());
  r.min_eig_transported = min_eigenvalue(h2 + b);
  r.transported_ok = r.min_eig_transported >= lambda - r.c_hbar_sq - 1e-10;

  std::vector<Eigen::Index> support;
  for (std::size_t k = 0; k < pou2.psi.size(); ++k) {
    if (pou2.psi[k] > 0.0) support.push_back(static_cast<Eigen::Index>(k));
  }
  if (support.empty()) {
    r.psi_margin = std::numeric_limits<double>::infinity();
  } else {
    const auto m = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = h2(support[i], support[j]);
    }
    sub.diagonal().array() -= lambda;
    r.psi_margin = min_eigenvalue(sub);
  }
  r.lemma = rank_lemma_check(h2, b, lambda - r.c_hbar_sq);
  return r;
}

}  // namespace weyl
