#include "weyl/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "weyl/errors.hpp"

namespace weyl {

namespace {

// Bounded box carrying the x-support of the integrand; empty if none.
Box integration_box(const ModelSpec& model, double lambda) {
  model.validate();
  Box box = sublevel_set_bound(model, lambda);
  if (box.is_empty()) return box;
  if (!box.is_bounded()) {
    if (!model.compact()) throw ConfigError("phase-space volume needs a bounded sublevel set");
    box = model.geometry.domain();
  }
  return box;
}

double fiber_volume(int dim, double lambda, double v) {
  const double r2 = lambda - v;
  if (r2 <= 0.0) return 0.0;
  return dim == 1 ? 2.0 * std::sqrt(r2) : std::numbers::pi * r2;
}

double midpoint_sum(const ModelSpec& model, const Box& box, double lambda, long cells) {
  const int dim = model.dim();
  const double hx = box.width(0) / static_cast<double>(cells);
  if (dim == 1) {
    double sum = 0.0;
    for (long i = 0; i < cells; ++i) {
      const double x = box.lo[0] + (static_cast<double>(i) + 0.5) * hx;
      sum += fiber_volume(1, lambda, model.potential({x, 0.0}));
    }
    return sum * hx;
  }
  const double hy = box.width(1) / static_cast<double>(cells);
  double sum = 0.0;
  for (long i = 0; i < cells; ++i) {
    const double x = box.lo[0] + (static_cast<double>(i) + 0.5) * hx;
    double row = 0.0;
    for (long j = 0; j < cells; ++j) {
      const double y = box.lo[1] + (static_cast<double>(j) + 0.5) * hy;
      row += fiber_volume(2, lambda, model.potential({x, y}));
    }
    sum += row;
  }
  return sum * hx * hy;
}

// Containment of V⁻¹([0, level]) strictly inside the pair's region.
bool sublevel_inside(const EquivalentPair& pair, double level, double audit_spacing) {
  for (const ModelSpec* m : {&pair.model_a, &pair.model_b}) {
    const Potential& v = m->potential;
    if (v.form() == PotentialForm::Patched) {
      if (!(v.mu_out() > level)) return false;
      const Box base = sublevel_set_bound(v.base(), level);
      if (!base.is_empty() && !(pair.region.clearance(base) > 0.0)) return false;
    } else {
      const Box b = sublevel_set_bound(*m, level);
      if (!b.is_empty() && (!b.is_bounded() || !(pair.region.clearance(b) > 0.0))) return false;
    }
  }
  if (audit_spacing > 0.0) return audit_equivalence(pair, audit_spacing, level).sublevel_inside_region;
  return true;
}

}  // namespace

std::string to_string(VolumeMethod method) {
  return method == VolumeMethod::ReducedQuadrature ? "ReducedQuadrature" : "MonteCarlo";
}

double unit_ball_volume(int n) {
  if (n == 1) return 2.0;
  if (n == 2) return std::numbers::pi;
  throw ConfigError("unit ball volume only for n = 1, 2");
}

PhaseSpaceVolume volume_reduced(const ModelSpec& model, double lambda, const QuadratureOptions& options) {
  PhaseSpaceVolume vol;
  vol.lambda = lambda;
  vol.method = VolumeMethod::ReducedQuadrature;
  const Box box = integration_box(model, lambda);
  if (box.is_empty() || lambda <= 0.0 || box.volume() == 0.0) return vol;

  const int dim = model.dim();
  const int levels = dim == 1 ? options.max_levels : std::min(options.max_levels, 6);
  long cells = options.initial_cells;
  double coarse = midpoint_sum(model, box, lambda, cells);
  vol.evaluations = static_cast<std::size_t>(dim == 1 ? cells : cells * cells);
  std::vector<double> estimates;
  double fine = coarse;
  for (int level = 0; level < levels; ++level) {
    cells *= 2;
    fine = midpoint_sum(model, box, lambda, cells);
    vol.evaluations += static_cast<std::size_t>(dim == 1 ? cells : cells * cells);
    const double est = std::abs(fine - coarse);
    estimates.push_back(est);
    coarse = fine;
    if (est <= std::max(options.absolute_tolerance, options.relative_tolerance * std::abs(fine))) break;
  }
  vol.value = fine;
  vol.error_estimate = estimates.back();
  const bool converged =
      vol.error_estimate <= std::max(options.absolute_tolerance, options.relative_tolerance * std::abs(fine));
  if (!converged && estimates.size() >= 3 && !(estimates.back() < estimates.front())) {
    std::ostringstream os;
    os << "phase-space quadrature not converging at lambda = " << lambda << ": error estimate "
       << estimates.front() << " -> " << estimates.back();
    throw NumericalError(os.str());
  }
  return vol;
}

PhaseSpaceVolume volume_monte_carlo(const ModelSpec& model, double lambda, std::size_t samples, std::uint64_t seed,
                                    unsigned shards) {
  if (samples < 10'000) throw ConfigError("Monte Carlo volume needs at least 1e4 samples");
  if (shards == 0) shards = 1;
  PhaseSpaceVolume vol;
  vol.lambda = lambda;
  vol.method = VolumeMethod::MonteCarlo;
  vol.evaluations = samples;

  const int dim = model.dim();
  Box xbox = lambda > 0.0 ? integration_box(model, lambda) : Box::empty(dim);
  const double xi = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
  const double box_volume = xbox.is_empty() ? 0.0 : xbox.volume() * std::pow(2.0 * xi, dim);
  if (box_volume == 0.0) {
    vol.flagged = true;
    return vol;
  }

  std::vector<std::size_t> hits(shards, 0);
  const std::size_t base = samples / shards;
  const std::size_t extra = samples % shards;
  for (unsigned s = 0; s < shards; ++s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), s};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = base + (s < extra ? 1 : 0);
    std::size_t h = 0;
    for (std::size_t k = 0; k < n; ++k) {
      Point x{0.0, 0.0};
      double xi2 = 0.0;
      for (int a = 0; a < dim; ++a) x[a] = xbox.lo[a] + xbox.width(a) * unit(rng);
      for (int a = 0; a < dim; ++a) {
        const double p = xi * (2.0 * unit(rng) - 1.0);
        xi2 += p * p;
      }
      if (xi2 + model.potential(x) <= lambda) ++h;
    }
    hits[s] = h;
  }
  std::size_t total = 0;
  for (std::size_t h : hits) total += h;

  const double n = static_cast<double>(samples);
  if (total == 0) {
    vol.flagged = true;
    vol.error_estimate = box_volume / n;
    return vol;
  }
  const double p = static_cast<double>(total) / n;
  vol.value = box_volume * p;
  vol.error_estimate = box_volume * std::sqrt(p * (1.0 - p) / n);
  return vol;
}

ContinuityMargin continuity_margin(const ModelSpec& model, double lambda, double epsilon, const EquivalentPair* pair,
                                   double audit_spacing) {
  if (!(epsilon > 0.0)) throw ConfigError("continuity margin needs epsilon > 0");
  QuadratureOptions opts;
  opts.relative_tolerance = model.dim() == 1 ? 1e-7 : 1e-4;
  const double base = volume_reduced(model, lambda, opts).value;

  auto shell = [&](double delta) { return volume_reduced(model, lambda + delta, opts).value - base; };
  auto admissible = [&](double delta) {
    if (!(shell(delta) < epsilon)) return false;
    return pair == nullptr || sublevel_inside(*pair, lambda + delta, audit_spacing);
  };

  ContinuityMargin m;
  if (admissible(kDeltaCap)) {
    m.delta = kDeltaCap;
    m.capped = true;
    m.shell_volume = shell(kDeltaCap);
    return m;
  }
  double lo = 0.0;
  double hi = kDeltaCap;
  for (int it = 0; it < 32; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (admissible(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "no positive delta satisfies the shell bound " << epsilon << " and sublevel containment at lambda = "
       << lambda << "; enlarge U";
    throw ConfigError(os.str());
  }
  m.delta = lo;
  m.shell_volume = shell(lo);
  return m;
}

}  // namespace weyl
