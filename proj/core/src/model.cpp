#include "weyl/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "weyl/errors.hpp"
#include "weyl/ramp.hpp"

namespace weyl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double horner(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * x + *it;
  return v;
}

// Strip trailing zero coefficients so the leading power is meaningful.
std::vector<double> trimmed(std::vector<double> c) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  return c;
}

// Every real root of p(x) - shift lies in [-R, R].
double cauchy_radius(const std::vector<double>& c, double shift) {
  const double lead = c.back();
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    const double a = (i == 0) ? c[i] - shift : c[i];
    m = std::max(m, std::abs(a / lead));
  }
  return 1.0 + m;
}

constexpr int kScanSamples = 4097;  // odd, so x = 0 is sampled

// Outermost crossings of p(x) = lambda, returned on the p > lambda side so
// the interval contains {p <= lambda}. Empty when no sample satisfies it.
Box polynomial_sublevel(const std::vector<double>& c, double lambda) {
  if (c.size() <= 1) {
    const double v = c.empty() ? 0.0 : c[0];
    return v <= lambda ? Box::interval(-kInf, kInf) : Box::empty(1);
  }
  const double radius = cauchy_radius(c, lambda);
  const double step = 2.0 * radius / (kScanSamples - 1);
  auto x_at = [&](int i) { return -radius + step * i; };
  int first = -1;
  int last = -1;
  for (int i = 0; i < kScanSamples; ++i) {
    if (horner(c, x_at(i)) <= lambda) {
      if (first < 0) first = i;
      last = i;
    }
  }
  if (first < 0) return Box::empty(1);

  auto refine = [&](double outside, double inside) {
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (outside + inside);
      if (mid == outside || mid == inside) break;
      if (horner(c, mid) <= lambda) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return outside;
  };
  const double lo = first == 0 ? -radius : refine(x_at(first - 1), x_at(first));
  const double hi = last == kScanSamples - 1 ? radius : refine(x_at(last + 1), x_at(last));
  return Box::interval(lo, hi);
}

void check_polynomial_axis(const std::vector<double>& c) {
  if (c.empty()) throw ConfigError("polynomial axis has no coefficients");
  const std::size_t degree = c.size() - 1;
  if (degree == 0) {
    if (c[0] < 0.0) throw ConfigError("polynomial potential must be non-negative");
    return;
  }
  if (degree % 2 != 0 || c.back() <= 0.0) {
    throw ConfigError("polynomial potential needs an even leading power with positive coefficient");
  }
  // Outside the Cauchy radius the leading term dominates and p > 0; sample
  // the inside densely.
  const double radius = cauchy_radius(c, 0.0);
  const int samples = 20001;
  for (int i = 0; i < samples; ++i) {
    const double x = -radius + 2.0 * radius * i / (samples - 1);
    if (horner(c, x) < -1e-12 * (1.0 + std::abs(c[0]))) {
      std::ostringstream os;
      os << "polynomial potential is negative at x = " << x;
      throw ConfigError(os.str());
    }
  }
}

}  // namespace

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::Line1D: return "Line1D";
    case GeometryKind::Plane2D: return "Plane2D";
    case GeometryKind::Circle: return "Circle";
    case GeometryKind::Torus2D: return "Torus2D";
    case GeometryKind::Interval: return "Interval";
    case GeometryKind::Rectangle: return "Rectangle";
  }
  return "?";
}

GeometryKind geometry_kind_from_string(const std::string& name) {
  for (auto k : {GeometryKind::Line1D, GeometryKind::Plane2D, GeometryKind::Circle,
                 GeometryKind::Torus2D, GeometryKind::Interval, GeometryKind::Rectangle}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown geometry kind '" + name + "'");
}

std::string to_string(PotentialForm form) {
  switch (form) {
    case PotentialForm::Polynomial: return "Polynomial";
    case PotentialForm::Harmonic: return "Harmonic";
    case PotentialForm::Constant: return "Constant";
    case PotentialForm::Patched: return "Patched";
  }
  return "?";
}

Geometry Geometry::line() {
  Geometry g;
  g.kind = GeometryKind::Line1D;
  g.dim = 1;
  return g;
}

Geometry Geometry::plane() {
  Geometry g;
  g.kind = GeometryKind::Plane2D;
  g.dim = 2;
  return g;
}

Geometry Geometry::circle(double circumference) {
  if (!(circumference > 0.0)) throw ConfigError("circle circumference must be positive");
  Geometry g;
  g.kind = GeometryKind::Circle;
  g.dim = 1;
  g.extent = {circumference, 0.0};
  g.lower = {-0.5 * circumference, 0.0};
  g.periodic = {true, false};
  return g;
}

Geometry Geometry::torus(double side_x, double side_y) {
  if (!(side_x > 0.0) || !(side_y > 0.0)) throw ConfigError("torus sides must be positive");
  Geometry g;
  g.kind = GeometryKind::Torus2D;
  g.dim = 2;
  g.extent = {side_x, side_y};
  g.lower = {-0.5 * side_x, -0.5 * side_y};
  g.periodic = {true, true};
  return g;
}

Geometry Geometry::interval(double length, double lower) {
  if (!(length > 0.0)) throw ConfigError("interval length must be positive");
  Geometry g;
  g.kind = GeometryKind::Interval;
  g.dim = 1;
  g.extent = {length, 0.0};
  g.lower = {lower, 0.0};
  return g;
}

Geometry Geometry::rectangle(double side_x, double side_y, double x0, double y0) {
  if (!(side_x > 0.0) || !(side_y > 0.0)) throw ConfigError("rectangle sides must be positive");
  Geometry g;
  g.kind = GeometryKind::Rectangle;
  g.dim = 2;
  g.extent = {side_x, side_y};
  g.lower = {x0, y0};
  return g;
}

Box Geometry::domain() const {
  if (!compact()) return Box::everything(dim);
  Box b;
  b.dim = dim;
  for (int a = 0; a < dim; ++a) {
    b.lo[a] = lower[a];
    b.hi[a] = lower[a] + extent[a];
  }
  return b;
}

Potential Potential::polynomial(std::vector<std::vector<double>> coefficients) {
  if (coefficients.empty() || coefficients.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("polynomial potential needs one coefficient list per axis (1 or 2 axes)");
  }
  Potential p;
  p.form_ = PotentialForm::Polynomial;
  p.dim_ = static_cast<int>(coefficients.size());
  for (auto& axis : coefficients) {
    axis = trimmed(std::move(axis));
    if (axis.empty()) axis.push_back(0.0);
    check_polynomial_axis(axis);
  }
  p.coefficients_ = std::move(coefficients);
  return p;
}

Potential Potential::harmonic(std::vector<double> stiffness) {
  if (stiffness.empty() || stiffness.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("harmonic potential needs one stiffness per axis (1 or 2 axes)");
  }
  for (double k : stiffness) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError("harmonic stiffness must be positive");
  }
  Potential p;
  p.form_ = PotentialForm::Harmonic;
  p.dim_ = static_cast<int>(stiffness.size());
  p.stiffness_ = std::move(stiffness);
  return p;
}

Potential Potential::constant(int dim, double level) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("constant potential dimension must be 1 or 2");
  if (!(level >= 0.0) || !std::isfinite(level)) {
    throw ConfigError("constant potential level must be finite and non-negative");
  }
  Potential p;
  p.form_ = PotentialForm::Constant;
  p.dim_ = dim;
  p.level_ = level;
  return p;
}

Potential Potential::patched(const Potential& base, const Box& region, double mu_out,
                             double lambda_ref, double ramp_width) {
  if (region.dim != base.dim()) throw ConfigError("patched region dimension differs from base potential");
  if (!region.is_bounded() || region.is_empty()) throw ConfigError("patched region must be a bounded box");
  if (!(mu_out > lambda_ref)) {
    std::ostringstream os;
    os << "patched potential needs mu_out > lambda_ref (got mu_out = " << mu_out
       << ", lambda_ref = " << lambda_ref << ")";
    throw ConfigError(os.str());
  }
  if (!(ramp_width >= 0.0)) throw ConfigError("patched ramp width must be non-negative");
  Potential p;
  p.form_ = PotentialForm::Patched;
  p.dim_ = base.dim();
  p.base_ = std::make_shared<const Potential>(base);
  p.region_ = region;
  p.mu_out_ = mu_out;
  p.lambda_ref_ = lambda_ref;
  p.ramp_width_ = ramp_width;
  return p;
}

const Potential& Potential::base() const {
  if (!base_) throw ConfigError("potential has no base (not a patched form)");
  return *base_;
}

double Potential::operator()(const Point& x) const {
  switch (form_) {
    case PotentialForm::Polynomial: {
      double v = 0.0;
      for (int a = 0; a < dim_; ++a) v += horner(coefficients_[a], x[a]);
      return v;
    }
    case PotentialForm::Harmonic: {
      double v = 0.0;
      for (int a = 0; a < dim_; ++a) v += stiffness_[a] * x[a] * x[a];
      return v;
    }
    case PotentialForm::Constant:
      return level_;
    case PotentialForm::Patched: {
      if (!(mu_out_ > lambda_ref_)) throw ConfigError("patched potential needs mu_out > lambda_ref");
      const double inside = (*base_)(x);
      if (region_.contains(x)) return inside;
      if (ramp_width_ <= 0.0) return mu_out_;
      double keep = 1.0;
      for (int a = 0; a < dim_; ++a) {
        const double d = std::max({0.0, region_.lo[a] - x[a], x[a] - region_.hi[a]});
        keep *= 1.0 - smoothstep(d / ramp_width_);
      }
      const double s = 1.0 - keep;
      return inside + s * (mu_out_ - inside);
    }
  }
  return 0.0;
}

bool Potential::confining() const {
  switch (form_) {
    case PotentialForm::Polynomial:
      return std::all_of(coefficients_.begin(), coefficients_.end(),
                         [](const auto& c) { return c.size() >= 3; });
    case PotentialForm::Harmonic:
      return true;
    case PotentialForm::Constant:
    case PotentialForm::Patched:
      return false;
  }
  return false;
}

std::string Potential::describe() const {
  std::ostringstream os;
  os << to_string(form_) << "(";
  switch (form_) {
    case PotentialForm::Polynomial:
      for (std::size_t a = 0; a < coefficients_.size(); ++a) {
        if (a) os << "; ";
        for (std::size_t i = 0; i < coefficients_[a].size(); ++i) os << (i ? "," : "") << coefficients_[a][i];
      }
      break;
    case PotentialForm::Harmonic:
      for (std::size_t a = 0; a < stiffness_.size(); ++a) os << (a ? "," : "") << stiffness_[a];
      break;
    case PotentialForm::Constant:
      os << level_;
      break;
    case PotentialForm::Patched:
      os << base_->describe() << " on " << region_.to_string() << ", out=" << mu_out_;
      break;
  }
  os << ")";
  return os.str();
}

void ModelSpec::validate() const {
  if (potential.dim() != geometry.dim) {
    throw ConfigError("potential dimension " + std::to_string(potential.dim()) +
                      " differs from geometry dimension " + std::to_string(geometry.dim));
  }
  if (!geometry.compact() && !potential.confining()) {
    throw ConfigError(to_string(geometry.kind) + " is non-compact and needs a confining potential, got " +
                      potential.describe());
  }
}

double evaluate_potential(const Potential& spec, const Point& x) { return spec(x); }

Box sublevel_set_bound(const Potential& spec, double lambda) {
  const int dim = spec.dim();
  switch (spec.form()) {
    case PotentialForm::Harmonic: {
      if (lambda < 0.0) return Box::empty(dim);
      Box b;
      b.dim = dim;
      for (int a = 0; a < dim; ++a) {
        const double r = std::sqrt(lambda / spec.stiffness()[a]);
        b.lo[a] = -r;
        b.hi[a] = r;
      }
      return b;
    }
    case PotentialForm::Polynomial: {
      // Each axis polynomial is non-negative, so p_a(x_a) <= V(x) <= lambda.
      Box b;
      b.dim = dim;
      for (int a = 0; a < dim; ++a) {
        const Box axis = polynomial_sublevel(spec.coefficients()[a], lambda);
        if (axis.is_empty()) return Box::empty(dim);
        b.lo[a] = axis.lo[0];
        b.hi[a] = axis.hi[0];
      }
      return b;
    }
    case PotentialForm::Constant:
      return spec.level() <= lambda ? Box::everything(dim) : Box::empty(dim);
    case PotentialForm::Patched: {
      if (lambda >= spec.mu_out()) return Box::everything(dim);
      // Outside the region V̄ >= min(V, mu_out) and mu_out > lambda.
      const Box base = sublevel_set_bound(spec.base(), lambda);
      return base.intersect(spec.region().expanded(spec.ramp_width()));
    }
  }
  return Box::everything(dim);
}

Box sublevel_set_bound(const ModelSpec& model, double lambda) {
  const Box b = sublevel_set_bound(model.potential, lambda);
  if (!model.compact()) return b;
  // Periodic charts wrap, so only intersect along Dirichlet axes; a periodic
  // axis keeps the bound when it fits inside the chart.
  return b.intersect(model.geometry.domain());
}

EquivalentPair compactify(const ModelSpec& model, double lambda, double margin) {
  model.validate();
  if (model.compact()) throw ConfigError("compactify expects a non-compact model");
  if (!(margin > 0.0) || !std::isfinite(margin)) throw ConfigError("compactify margin must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("compactify level must be non-negative");

  Box bound = sublevel_set_bound(model.potential, lambda);
  if (bound.is_empty()) bound = Box::centered(model.dim(), 0.0);
  if (!bound.is_bounded()) throw ConfigError("sublevel set is unbounded; potential is not confining");

  EquivalentPair pair;
  pair.lambda = lambda;
  pair.model_a = model;
  pair.region = bound.expanded(0.5 * margin);

  std::array<double, kMaxDim> side{0.0, 0.0};
  for (int a = 0; a < model.dim(); ++a) {
    const double reach = std::max(std::abs(bound.lo[a]), std::abs(bound.hi[a]));
    side[a] = 2.0 * (reach + margin);
  }
  const Geometry closed =
      model.dim() == 1 ? Geometry::circle(side[0]) : Geometry::torus(side[0], side[1]);

  const double mu_out = lambda + std::max(1.0, lambda);
  const double ramp = 0.25 * margin;
  pair.model_b.geometry = closed;
  pair.model_b.potential = Potential::patched(model.potential, pair.region, mu_out, lambda, ramp);

  // V̄ must stay above lambda outside U; sample the closed chart.
  const Box chart = closed.domain();
  const int samples = model.dim() == 1 ? 4001 : 201;
  const int ny = model.dim() == 1 ? 1 : samples;
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < ny; ++j) {
      Point x{chart.lo[0] + chart.width(0) * i / (samples - 1), 0.0};
      if (model.dim() == 2) x[1] = chart.lo[1] + chart.width(1) * j / (samples - 1);
      if (pair.region.contains(x)) continue;
      if (!(pair.model_b.potential(x) > lambda)) {
        std::ostringstream os;
        os << "compactify margin " << margin << " too small: V̄ <= lambda outside U at x = " << x[0];
        throw ConfigError(os.str());
      }
    }
  }
  return pair;
}

EquivalenceAudit audit_equivalence(const EquivalentPair& pair, double spacing) {
  return audit_equivalence(pair, spacing, pair.lambda);
}

EquivalenceAudit audit_equivalence(const EquivalentPair& pair, double spacing, double level) {
  if (!(spacing > 0.0)) throw ConfigError("audit spacing must be positive");
  EquivalenceAudit audit;
  const int dim = pair.model_a.dim();
  if (pair.model_b.dim() != dim || pair.region.dim != dim) {
    audit.spacing_match = false;
    audit.detail = "dimension mismatch";
    return audit;
  }

  // Lattice spacing·Zⁿ restricted to a box.
  auto for_nodes = [&](const Box& box, auto&& fn) {
    std::array<long, kMaxDim> first{0, 0};
    std::array<long, kMaxDim> last{0, 0};
    for (int a = 0; a < dim; ++a) {
      first[a] = static_cast<long>(std::ceil(box.lo[a] / spacing));
      last[a] = static_cast<long>(std::floor(box.hi[a] / spacing));
    }
    for (long i = first[0]; i <= last[0]; ++i) {
      for (long j = first[1]; j <= (dim == 2 ? last[1] : first[1]); ++j) {
        Point x{i * spacing, dim == 2 ? j * spacing : 0.0};
        fn(x);
      }
    }
  };

  // Potential match on U.
  for_nodes(pair.region, [&](const Point& x) {
    ++audit.nodes_checked;
    const double va = pair.model_a.potential(x);
    const double vb = pair.model_b.potential(x);
    const double diff = std::abs(va - vb);
    audit.max_potential_mismatch = std::max(audit.max_potential_mismatch, diff);
    if (va != vb && audit.potential_match) {
      audit.potential_match = false;
      std::ostringstream os;
      os << "V_a != V_b at x = (" << x[0] << ", " << x[1] << ")";
      audit.detail = os.str();
    }
  });

  // Sublevel containment: every node with V_j <= level sits strictly inside U.
  auto check_model = [&](const ModelSpec& m, const char* label) {
    Box scan = m.compact() ? m.geometry.domain() : pair.region.expanded(pair.region.width(0));
    if (!m.compact()) {
      const Box bound = sublevel_set_bound(m.potential, level);
      if (bound.is_bounded() && !bound.is_empty()) {
        for (int a = 0; a < dim; ++a) {
          scan.lo[a] = std::min(scan.lo[a], bound.lo[a] - spacing);
          scan.hi[a] = std::max(scan.hi[a], bound.hi[a] + spacing);
        }
      }
    }
    for_nodes(scan, [&](const Point& x) {
      ++audit.nodes_checked;
      if (m.potential(x) <= level && !pair.region.contains_strictly(x)) {
        if (audit.sublevel_inside_region) {
          std::ostringstream os;
          os << "model " << label << ": V <= " << level << " at x = (" << x[0] << ", " << x[1]
             << ") outside U " << pair.region.to_string();
          audit.detail = os.str();
        }
        audit.sublevel_inside_region = false;
      }
    });
  };
  check_model(pair.model_a, "a");
  check_model(pair.model_b, "b");
  return audit;
}

}  // namespace weyl
