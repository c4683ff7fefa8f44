#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "weyl/box.hpp"
#include "weyl/model.hpp"

namespace weyl {

// Unknowns along one axis sit at origin + (offset + i)·spacing for
// i = 0 .. nodes-1. Dirichlet axes have eliminated boundary nodes at i = -1
// and i = nodes; periodic axes wrap node `nodes` onto node 0.
struct AxisGrid {
  std::size_t nodes = 0;
  double spacing = 0.0;
  double origin = 0.0;
  long offset = 0;
  bool periodic = false;

  double coordinate(long i) const { return origin + static_cast<double>(offset + i) * spacing; }
};

// Truncation of a non-compact model to a Dirichlet box.
struct Truncation {
  Box box;
  double lambda_max = 1.0;
  double safety_factor = 2.0;
};

struct Grid {
  int dim = 1;
  std::array<AxisGrid, kMaxDim> axes{};
  std::optional<Truncation> truncation;

  std::size_t size() const;
  // Row-major: the last axis varies fastest.
  std::size_t index(std::size_t i0, std::size_t i1 = 0) const {
    return dim == 1 ? i0 : i0 * axes[1].nodes + i1;
  }
  std::array<std::size_t, kMaxDim> multi_index(std::size_t flat) const;
  Point coordinate(std::size_t flat) const;
  double cell_volume() const;
  double min_spacing() const;
  std::string describe() const;
};

// Resolution and truncation rules for grids built from ħ.
struct GridPolicy {
  double resolution_factor = 4.0;  // h <= ħ / (factor · √λ_max)
  double safety_factor = 2.0;      // boundary V >= factor · λ_max
  double decay_action = 20.0;      // WKB action ∫√(V-λ)/ħ across the truncation band
  std::size_t max_unknowns = 3'000'000;
};

// Uniform grid with the given number of unknowns per axis. Compact models
// ignore `truncation`; non-compact models require it.
Grid make_uniform_grid(const ModelSpec& model, std::array<std::size_t, kMaxDim> nodes,
                       const std::optional<Truncation>& truncation = std::nullopt);

// Grid sized by `policy` for energies up to lambda_max at the given ħ.
// Non-compact models get a truncation box satisfying the safety and decay
// rules; nodes sit on the lattice h·Zⁿ.
Grid make_grid(const ModelSpec& model, double hbar, double lambda_max, const GridPolicy& policy);

// Matching grids for an equivalent pair: identical spacing per axis and node
// coordinates on the common lattice, so the identification Φ is the identity
// on shared nodes.
struct PairGrids {
  Grid a;
  Grid b;
};
PairGrids make_pair_grids(const EquivalentPair& pair, double hbar, double lambda_max,
                          const GridPolicy& policy);

// Target spacing from the resolution rule.
double target_spacing(double hbar, double lambda_max, const GridPolicy& policy);

}  // namespace weyl

namespace weyl {

// For every node of `from` inside `region`, the index of the node of `to` at
// the same coordinate, or -1. Both grids must share spacing and lattice
// origin (as produced by make_pair_grids); periodic axes of `to` wrap.
std::vector<long> shared_node_map(const Grid& from, const Grid& to, const Box& region);

}  // namespace weyl
