#include "weyl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "weyl/errors.hpp"

namespace weyl {

namespace {

constexpr std::size_t kMinNodes = 3;

void check_nodes(std::size_t n, int axis) {
  if (n < kMinNodes) {
    throw ConfigError("grid axis " + std::to_string(axis) + " needs at least 3 nodes, got " +
                      std::to_string(n));
  }
}

AxisGrid periodic_axis(double lower, double length, std::size_t nodes) {
  AxisGrid ax;
  ax.nodes = nodes;
  ax.spacing = length / static_cast<double>(nodes);
  ax.origin = lower;
  ax.offset = 0;
  ax.periodic = true;
  return ax;
}

AxisGrid dirichlet_axis(double lo, double hi, std::size_t nodes) {
  AxisGrid ax;
  ax.nodes = nodes;
  ax.spacing = (hi - lo) / static_cast<double>(nodes + 1);
  ax.origin = lo;
  ax.offset = 1;
  ax.periodic = false;
  return ax;
}

// Dirichlet axis on the lattice spacing·Z covering [lo, hi].
AxisGrid lattice_axis(double lo, double hi, double spacing) {
  const long lo_idx = static_cast<long>(std::floor(lo / spacing));
  const long hi_idx = static_cast<long>(std::ceil(hi / spacing));
  AxisGrid ax;
  ax.spacing = spacing;
  ax.origin = 0.0;
  ax.offset = lo_idx + 1;
  ax.nodes = static_cast<std::size_t>(std::max(0L, hi_idx - lo_idx - 1));
  ax.periodic = false;
  return ax;
}

// Coordinate along `axis` with the other axes at zero.
Point along(int axis, double t) {
  Point x{0.0, 0.0};
  x[axis] = t;
  return x;
}

// Walk outward from `start` along `axis` (direction ±1) until the WKB action
// ∫√((V - λ)₊)/ħ reaches `target`.
double decay_reach(const Potential& v, int axis, double start, int direction, double lambda,
                   double hbar, double target, double step) {
  double t = start;
  double action = 0.0;
  for (int it = 0; it < 10'000'000 && action < target; ++it) {
    const double mid = t + 0.5 * direction * step;
    action += std::sqrt(std::max(0.0, v(along(axis, mid)) - lambda)) * step / hbar;
    t += direction * step;
  }
  return t;
}

// Truncation box for a non-compact model on the given per-axis spacings.
Box truncation_box(const ModelSpec& model, double lambda_max, double hbar, const GridPolicy& policy,
                   const std::array<double, kMaxDim>& spacing) {
  const int dim = model.dim();
  const double level = std::max(lambda_max, 0.0);
  Box safe = sublevel_set_bound(model.potential, policy.safety_factor * std::max(level, 1e-12));
  Box classical = sublevel_set_bound(model.potential, level);
  if (classical.is_empty()) classical = Box::centered(dim, 0.0);
  if (safe.is_empty()) safe = Box::centered(dim, 0.0);
  if (!safe.is_bounded() || !classical.is_bounded()) {
    throw ConfigError("cannot truncate: potential is not confining");
  }
  Box box;
  box.dim = dim;
  for (int a = 0; a < dim; ++a) {
    const double step = spacing[a];
    const double lo_decay = decay_reach(model.potential, a, classical.lo[a], -1, level, hbar,
                                        policy.decay_action, step);
    const double hi_decay = decay_reach(model.potential, a, classical.hi[a], +1, level, hbar,
                                        policy.decay_action, step);
    box.lo[a] = std::min(safe.lo[a] - step, lo_decay);
    box.hi[a] = std::max(safe.hi[a] + step, hi_decay);
  }
  return box;
}

void check_size(const Grid& g, const GridPolicy& policy) {
  for (int a = 0; a < g.dim; ++a) check_nodes(g.axes[a].nodes, a);
  if (g.size() > policy.max_unknowns) {
    throw ConfigError("grid " + g.describe() + " exceeds the unknown budget of " +
                      std::to_string(policy.max_unknowns));
  }
}

}  // namespace

std::size_t Grid::size() const {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= axes[a].nodes;
  return n;
}

std::array<std::size_t, kMaxDim> Grid::multi_index(std::size_t flat) const {
  if (dim == 1) return {flat, 0};
  return {flat / axes[1].nodes, flat % axes[1].nodes};
}

Point Grid::coordinate(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point x{0.0, 0.0};
  for (int a = 0; a < dim; ++a) x[a] = axes[a].coordinate(static_cast<long>(idx[a]));
  return x;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= axes[a].spacing;
  return v;
}

double Grid::min_spacing() const {
  double h = axes[0].spacing;
  for (int a = 1; a < dim; ++a) h = std::min(h, axes[a].spacing);
  return h;
}

std::string Grid::describe() const {
  std::ostringstream os;
  for (int a = 0; a < dim; ++a) {
    if (a) os << " x ";
    os << axes[a].nodes << (axes[a].periodic ? "p" : "") << "@" << axes[a].spacing;
  }
  return os.str();
}

double target_spacing(double hbar, double lambda_max, const GridPolicy& policy) {
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (!(policy.resolution_factor > 0.0)) throw ConfigError("resolution factor must be positive");
  const double level = lambda_max > 0.0 ? lambda_max : 1.0;
  return hbar / (policy.resolution_factor * std::sqrt(level));
}

Grid make_uniform_grid(const ModelSpec& model, std::array<std::size_t, kMaxDim> nodes,
                       const std::optional<Truncation>& truncation) {
  model.validate();
  Grid g;
  g.dim = model.dim();
  const Geometry& geo = model.geometry;
  if (!geo.compact()) {
    if (!truncation) throw ConfigError("non-compact model needs a truncation box");
    if (truncation->box.dim != g.dim || !truncation->box.is_bounded() || truncation->box.is_empty()) {
      throw ConfigError("truncation box must be bounded and match the model dimension");
    }
    if (truncation->safety_factor < 2.0) throw ConfigError("truncation safety factor must be >= 2");
    g.truncation = truncation;
  }
  for (int a = 0; a < g.dim; ++a) {
    check_nodes(nodes[a], a);
    if (!geo.compact()) {
      g.axes[a] = dirichlet_axis(truncation->box.lo[a], truncation->box.hi[a], nodes[a]);
    } else if (geo.periodic[a]) {
      g.axes[a] = periodic_axis(geo.lower[a], geo.extent[a], nodes[a]);
    } else {
      g.axes[a] = dirichlet_axis(geo.lower[a], geo.lower[a] + geo.extent[a], nodes[a]);
    }
  }
  return g;
}

Grid make_grid(const ModelSpec& model, double hbar, double lambda_max, const GridPolicy& policy) {
  model.validate();
  const double h = target_spacing(hbar, lambda_max, policy);
  Grid g;
  g.dim = model.dim();
  const Geometry& geo = model.geometry;
  if (geo.compact()) {
    for (int a = 0; a < g.dim; ++a) {
      const auto cells = static_cast<std::size_t>(std::ceil(geo.extent[a] / h));
      if (geo.periodic[a]) {
        g.axes[a] = periodic_axis(geo.lower[a], geo.extent[a], std::max<std::size_t>(cells, kMinNodes));
      } else {
        g.axes[a] = dirichlet_axis(geo.lower[a], geo.lower[a] + geo.extent[a],
                                   std::max<std::size_t>(cells, kMinNodes + 1) - 1);
      }
    }
  } else {
    const Box box = truncation_box(model, lambda_max, hbar, policy, {h, h});
    Truncation t;
    t.lambda_max = lambda_max;
    t.safety_factor = policy.safety_factor;
    t.box.dim = g.dim;
    for (int a = 0; a < g.dim; ++a) {
      g.axes[a] = lattice_axis(box.lo[a], box.hi[a], h);
      t.box.lo[a] = g.axes[a].coordinate(-1);
      t.box.hi[a] = g.axes[a].coordinate(static_cast<long>(g.axes[a].nodes));
    }
    g.truncation = t;
  }
  check_size(g, policy);
  return g;
}

PairGrids make_pair_grids(const EquivalentPair& pair, double hbar, double lambda_max,
                          const GridPolicy& policy) {
  pair.model_a.validate();
  pair.model_b.validate();
  const int dim = pair.model_a.dim();
  const double h_target = target_spacing(hbar, lambda_max, policy);

  // Spacing comes from the periodic comparison model; the other model is laid
  // on the same lattice. Pairs without a periodic member (identical models)
  // share one grid.
  const bool a_periodic = pair.model_a.geometry.periodic[0];
  const bool b_periodic = pair.model_b.geometry.periodic[0];
  const Geometry& ga = pair.model_a.geometry;
  const Geometry& gb = pair.model_b.geometry;
  if (ga.kind == gb.kind && ga.extent == gb.extent && ga.lower == gb.lower) {
    Grid g = make_grid(pair.model_a, hbar, lambda_max, policy);
    return PairGrids{g, g};
  }
  if (!a_periodic && !b_periodic) {
    throw ConfigError("pair grids need a periodic member or identical geometries");
  }
  const ModelSpec& closed = b_periodic ? pair.model_b : pair.model_a;
  const ModelSpec& open = b_periodic ? pair.model_a : pair.model_b;

  std::array<double, kMaxDim> spacing{h_target, h_target};
  Grid closed_grid;
  closed_grid.dim = dim;
  {
    for (int a = 0; a < dim; ++a) {
      const double length = closed.geometry.extent[a];
      auto n = static_cast<std::size_t>(std::ceil(length / h_target));
      if (n % 2) ++n;
      n = std::max<std::size_t>(n, 4);
      AxisGrid ax;
      ax.nodes = n;
      ax.spacing = length / static_cast<double>(n);
      ax.origin = 0.0;
      ax.offset = -static_cast<long>(n / 2);
      ax.periodic = true;
      closed_grid.axes[a] = ax;
      spacing[a] = ax.spacing;
    }
  }

  Grid open_grid;
  open_grid.dim = dim;
  if (open.compact()) {
    throw ConfigError("pair grids support one periodic and one non-compact model");
  } else {
    Box box = truncation_box(open, lambda_max, hbar, policy, spacing);
    // The identification region must sit inside the truncated box with room
    // for the partition ramps.
    for (int a = 0; a < dim; ++a) {
      box.lo[a] = std::min(box.lo[a], pair.region.lo[a] - 2.0 * spacing[a]);
      box.hi[a] = std::max(box.hi[a], pair.region.hi[a] + 2.0 * spacing[a]);
    }
    Truncation t;
    t.lambda_max = lambda_max;
    t.safety_factor = policy.safety_factor;
    t.box.dim = dim;
    for (int a = 0; a < dim; ++a) {
      open_grid.axes[a] = lattice_axis(box.lo[a], box.hi[a], spacing[a]);
      t.box.lo[a] = open_grid.axes[a].coordinate(-1);
      t.box.hi[a] = open_grid.axes[a].coordinate(static_cast<long>(open_grid.axes[a].nodes));
    }
    open_grid.truncation = t;
  }
  check_size(closed_grid, policy);
  check_size(open_grid, policy);

  PairGrids grids;
  if (b_periodic) {
    grids.a = std::move(open_grid);
    grids.b = std::move(closed_grid);
  } else {
    grids.a = std::move(closed_grid);
    grids.b = std::move(open_grid);
  }
  return grids;
}

}  // namespace weyl

namespace weyl {

std::vector<long> shared_node_map(const Grid& from, const Grid& to, const Box& region) {
  if (from.dim != to.dim) throw ConfigError("shared node map: dimension mismatch");
  for (int a = 0; a < from.dim; ++a) {
    if (from.axes[a].spacing != to.axes[a].spacing || from.axes[a].origin != to.axes[a].origin) {
      throw ConfigError("shared node map: grids do not share a lattice on axis " + std::to_string(a));
    }
  }
  std::vector<long> map(from.size(), -1);
  for (std::size_t k = 0; k < from.size(); ++k) {
    if (!region.contains(from.coordinate(k))) continue;
    const auto idx = from.multi_index(k);
    std::array<long, kMaxDim> target{0, 0};
    bool inside = true;
    for (int a = 0; a < from.dim; ++a) {
      const AxisGrid& fa = from.axes[a];
      const AxisGrid& ta = to.axes[a];
      long i = fa.offset + static_cast<long>(idx[a]) - ta.offset;
      const long n = static_cast<long>(ta.nodes);
      if (ta.periodic) {
        i = ((i % n) + n) % n;
      } else if (i < 0 || i >= n) {
        inside = false;
      }
      target[a] = i;
    }
    if (inside) {
      map[k] = static_cast<long>(to.index(static_cast<std::size_t>(target[0]), static_cast<std::size_t>(target[1])));
    }
  }
  return map;
}

}  // namespace weyl
