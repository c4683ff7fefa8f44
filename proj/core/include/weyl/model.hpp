#pragma once

// Catalog of desk-scale geometries and potentials, and the construction of
// λ-equivalent pairs (including the compact comparison model).

#include <memory>
#include <string>
#include <vector>

#include "weyl/box.hpp"

namespace weyl {

enum class GeometryKind { Line1D, Plane2D, Circle, Torus2D, Interval, Rectangle };

std::string to_string(GeometryKind kind);
GeometryKind geometry_kind_from_string(const std::string& name);

// Flat geometry. Periodic axes have no boundary; non-periodic axes of compact
// geometries carry Dirichlet conditions. Line1D/Plane2D are unbounded.
struct Geometry {
  GeometryKind kind = GeometryKind::Line1D;
  int dim = 1;
  std::array<double, kMaxDim> lower{0.0, 0.0};
  std::array<double, kMaxDim> extent{0.0, 0.0};
  std::array<bool, kMaxDim> periodic{false, false};

  static Geometry line();
  static Geometry plane();
  // Periodic geometries are centered on the origin unless a lower corner is
  // given.
  static Geometry circle(double circumference);
  static Geometry torus(double side_x, double side_y);
  static Geometry interval(double length, double lower = 0.0);
  static Geometry rectangle(double side_x, double side_y, double x0 = 0.0, double y0 = 0.0);

  bool compact() const { return kind != GeometryKind::Line1D && kind != GeometryKind::Plane2D; }
  // Coordinate chart covered by the geometry; unbounded for Line1D/Plane2D.
  Box domain() const;
};

enum class PotentialForm { Polynomial, Harmonic, Constant, Patched };

std::string to_string(PotentialForm form);

// Non-negative potential V on the coordinate chart. Immutable; copies share
// the base of a patched potential.
class Potential {
 public:
  // Separable polynomial V(x) = Σ_axis p_axis(x_axis); coefficients in
  // ascending powers. Each p_axis must be non-negative with an even leading
  // power and positive leading coefficient.
  static Potential polynomial(std::vector<std::vector<double>> coefficients);
  // V(x) = Σ k_axis x_axis².
  static Potential harmonic(std::vector<double> stiffness);
  static Potential constant(int dim, double level);
  // Equals `base` on `region`, `mu_out` beyond `region` expanded by
  // `ramp_width`, and a quintic blend in between. Requires mu_out > lambda_ref.
  static Potential patched(const Potential& base, const Box& region, double mu_out,
                           double lambda_ref, double ramp_width = 0.0);

  PotentialForm form() const { return form_; }
  int dim() const { return dim_; }

  double operator()(const Point& x) const;

  // V(x) -> ∞ as |x| -> ∞, decided from the form.
  bool confining() const;

  const std::vector<std::vector<double>>& coefficients() const { return coefficients_; }
  const std::vector<double>& stiffness() const { return stiffness_; }
  double level() const { return level_; }
  const Potential& base() const;
  const Box& region() const { return region_; }
  double mu_out() const { return mu_out_; }
  double lambda_ref() const { return lambda_ref_; }
  double ramp_width() const { return ramp_width_; }

  std::string describe() const;

 private:
  Potential() = default;

  PotentialForm form_ = PotentialForm::Constant;
  int dim_ = 1;
  std::vector<std::vector<double>> coefficients_;
  std::vector<double> stiffness_;
  double level_ = 0.0;
  std::shared_ptr<const Potential> base_;
  Box region_;
  double mu_out_ = 0.0;
  double lambda_ref_ = 0.0;
  double ramp_width_ = 0.0;
};

struct ModelSpec {
  Geometry geometry;
  Potential potential = Potential::constant(1, 0.0);

  int dim() const { return geometry.dim; }
  bool compact() const { return geometry.compact(); }
  // Throws ConfigError when dimensions disagree or a non-compact geometry
  // carries a non-confining potential.
  void validate() const;
};

double evaluate_potential(const Potential& spec, const Point& x);

// Box containing {x : V(x) <= lambda}; empty when the set is empty and
// unbounded when V never exceeds lambda (constant forms).
Box sublevel_set_bound(const Potential& spec, double lambda);

// Sublevel bound restricted to the model's chart.
Box sublevel_set_bound(const ModelSpec& model, double lambda);

struct EquivalentPair {
  ModelSpec model_a;
  ModelSpec model_b;
  Box region;  // shared identification region U, identity map between charts
  double lambda = 0.0;
};

// Builds ((M, V), (M̄, V̄)) with M̄ the flat circle/torus covering U plus
// `margin`; V̄ = V on U and V̄ > lambda outside U.
EquivalentPair compactify(const ModelSpec& model, double lambda, double margin);

// Node-wise audit of the λ-equivalence invariants on the lattice spacing·Zⁿ.
struct EquivalenceAudit {
  bool sublevel_inside_region = true;
  bool potential_match = true;
  bool spacing_match = true;
  double max_potential_mismatch = 0.0;
  std::size_t nodes_checked = 0;
  std::string detail;

  bool ok() const { return sublevel_inside_region && potential_match && spacing_match; }
};

EquivalenceAudit audit_equivalence(const EquivalentPair& pair, double spacing);
// Same audit with the containment checked at `level` instead of pair.lambda.
EquivalenceAudit audit_equivalence(const EquivalentPair& pair, double spacing, double level);

}  // namespace weyl
