#pragma once

// Classical phase-space volume Vol{(x, ξ) : |ξ|² + V(x) <= λ} on flat models.

#include <cstdint>
#include <optional>
#include <string>

#include "weyl/model.hpp"

namespace weyl {

enum class VolumeMethod { ReducedQuadrature, MonteCarlo };

std::string to_string(VolumeMethod method);

struct PhaseSpaceVolume {
  double value = 0.0;
  double lambda = 0.0;
  VolumeMethod method = VolumeMethod::ReducedQuadrature;
  double error_estimate = 0.0;  // Richardson difference, or one MC standard error
  bool flagged = false;         // MC: zero hits
  std::size_t evaluations = 0;
};

// Volume of the unit ball in n dimensions (n = 1, 2).
double unit_ball_volume(int n);

struct QuadratureOptions {
  double relative_tolerance = 1e-7;
  double absolute_tolerance = 1e-12;
  int initial_cells = 64;  // per axis
  int max_levels = 18;     // 1D doublings; 2D uses fewer
};

// ω_n ∫ (λ - V(x))₊^{n/2} dx by composite midpoint rules on the sublevel box
// (or the whole chart for compact models), doubled until the difference of
// consecutive levels meets the tolerance. Throws NumericalError when the
// difference stops shrinking.
PhaseSpaceVolume volume_reduced(const ModelSpec& model, double lambda, const QuadratureOptions& options = {});

// Direct 2n-dimensional indicator sampling. Deterministic in (seed, shards):
// shard s draws from a generator seeded by (seed, s) and hits are summed in
// shard order.
PhaseSpaceVolume volume_monte_carlo(const ModelSpec& model, double lambda, std::size_t samples, std::uint64_t seed,
                                    unsigned shards = 1);

struct ContinuityMargin {
  double delta = 0.0;
  double shell_volume = 0.0;  // Vol(λ+δ) - Vol(λ)
  bool capped = false;        // δ hit the search cap
};

inline constexpr double kDeltaCap = 1.0;

// Largest δ in (0, 1] with Vol(λ+δ) - Vol(λ) < ε and, when a pair is given,
// V_j⁻¹([0, λ+δ]) strictly inside U on both models. Throws ConfigError when
// no positive δ satisfies both.
ContinuityMargin continuity_margin(const ModelSpec& model, double lambda, double epsilon,
                                   const EquivalentPair* pair = nullptr, double audit_spacing = 0.0);

}  // namespace weyl
