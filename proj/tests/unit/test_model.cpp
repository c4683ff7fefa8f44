#include <gtest/gtest.h>

#include <cmath>

#include "weyl/errors.hpp"
#include "weyl/grid.hpp"
#include "weyl/model.hpp"

using namespace weyl;

namespace {

ModelSpec harmonic1d() { return {Geometry::line(), Potential::harmonic({1.0})}; }
ModelSpec harmonic2d() { return {Geometry::plane(), Potential::harmonic({1.0, 1.0})}; }

}  // namespace

TEST(Potential, HarmonicValues) {
  const Potential v = Potential::harmonic({1.0});
  EXPECT_EQ(v({0.0, 0.0}), 0.0);
  EXPECT_EQ(v({2.0, 0.0}), 4.0);
  EXPECT_EQ(evaluate_potential(v, {-3.0, 0.0}), 9.0);
}

TEST(Potential, PatchedClampsOutsideRegion) {
  const Potential v = Potential::patched(Potential::harmonic({1.0}), Box::interval(-3.0, 3.0), 5.0, 1.0);
  EXPECT_EQ(v({4.0, 0.0}), 5.0);
  EXPECT_EQ(v({2.0, 0.0}), 4.0);
}

TEST(Potential, PatchedRejectsLowOutsideLevel) {
  EXPECT_THROW(Potential::patched(Potential::harmonic({1.0}), Box::interval(-3.0, 3.0), 1.0, 1.0), ConfigError);
}

TEST(Potential, PatchedRampIsMonotoneBetweenBaseAndLevel) {
  const Potential v = Potential::patched(Potential::harmonic({1.0}), Box::interval(-2.0, 2.0), 9.0, 2.0, 0.5);
  double prev = v({2.0, 0.0});
  for (double x = 2.0; x <= 2.6; x += 0.01) {
    const double now = v({x, 0.0});
    EXPECT_GE(now, prev - 1e-12);
    EXPECT_GE(now, 2.0);
    prev = now;
  }
  EXPECT_DOUBLE_EQ(v({2.6, 0.0}), 9.0);
}

TEST(Potential, PolynomialValidation) {
  EXPECT_NO_THROW(Potential::polynomial({{0.0, 0.0, 0.0, 0.0, 1.0}}));
  EXPECT_THROW(Potential::polynomial({{0.0, 0.0, 0.0, 1.0}}), ConfigError);   // odd leading power
  EXPECT_THROW(Potential::polynomial({{0.0, 0.0, -1.0}}), ConfigError);       // negative lead
  EXPECT_THROW(Potential::polynomial({{-1.0, 0.0, 1.0}}), ConfigError);       // negative at 0
}

TEST(ModelSpec, NonCompactNeedsConfinement) {
  ModelSpec flat{Geometry::line(), Potential::constant(1, 0.0)};
  EXPECT_THROW(flat.validate(), ConfigError);
  ModelSpec circle{Geometry::circle(2.0 * M_PI), Potential::constant(1, 0.0)};
  EXPECT_NO_THROW(circle.validate());
  ModelSpec mismatch{Geometry::plane(), Potential::harmonic({1.0})};
  EXPECT_THROW(mismatch.validate(), ConfigError);
}

TEST(SublevelBound, SpecExamples) {
  const Box a = sublevel_set_bound(Potential::harmonic({1.0}), 4.0);
  EXPECT_NEAR(a.lo[0], -2.0, 1e-12);
  EXPECT_NEAR(a.hi[0], 2.0, 1e-12);

  const Box b = sublevel_set_bound(Potential::polynomial({{0.0, 0.0, 0.0, 0.0, 1.0}}), 16.0);
  EXPECT_NEAR(b.lo[0], -2.0, 1e-9);
  EXPECT_NEAR(b.hi[0], 2.0, 1e-9);
  EXPECT_GE(b.hi[0], 2.0);  // must contain the set

  const Box c = sublevel_set_bound(Potential::harmonic({1.0, 1.0}), 1.0);
  for (int ax = 0; ax < 2; ++ax) {
    EXPECT_NEAR(c.lo[ax], -1.0, 1e-12);
    EXPECT_NEAR(c.hi[ax], 1.0, 1e-12);
  }
}

TEST(SublevelBound, ContainsEveryNodeBelowLevel) {
  const Potential quartic = Potential::polynomial({{1.0, -1.0, 0.5, 0.0, 1.0}, {0.0, 0.0, 2.0}});
  for (double lambda : {0.1, 1.0, 3.0}) {
    const Box b = sublevel_set_bound(quartic, lambda);
    for (double x = -4.0; x <= 4.0; x += 0.01) {
      for (double y = -4.0; y <= 4.0; y += 0.05) {
        if (quartic({x, y}) <= lambda) ASSERT_TRUE(b.contains(Point{x, y})) << x << "," << y;
      }
    }
  }
}

TEST(Potential, ConfiningAlongRays) {
  for (const ModelSpec& m : {harmonic1d(), harmonic2d(),
                             ModelSpec{Geometry::line(), Potential::polynomial({{0.0, 0.0, 0.0, 0.0, 1.0}})}}) {
    const Box b = sublevel_set_bound(m, 1.0);
    const double r0 = std::max(b.hi[0], 1.0);
    for (double angle = 0.0; angle < 2.0 * M_PI; angle += 0.4) {
      double prev = -1.0;
      for (double scale : {10.0, 100.0, 1000.0}) {
        Point p{scale * r0 * std::cos(angle), m.dim() == 2 ? scale * r0 * std::sin(angle) : 0.0};
        if (m.dim() == 1) p[0] = scale * r0 * (std::cos(angle) >= 0 ? 1.0 : -1.0);
        const double v = m.potential(p);
        EXPECT_GT(v, prev);
        prev = v;
      }
      EXPECT_GT(prev, 1e4);
    }
  }
}

TEST(Compactify, LineHarmonicPair) {
  const EquivalentPair pair = compactify(harmonic1d(), 1.0, 2.0);
  EXPECT_TRUE(pair.region.contains(Box::interval(-1.0, 1.0)));
  EXPECT_EQ(pair.model_b.geometry.kind, GeometryKind::Circle);
  EXPECT_GE(pair.model_b.geometry.extent[0], 2.0 * (1.0 + 2.0));
  for (double x = pair.region.lo[0]; x <= pair.region.hi[0]; x += 0.01) {
    EXPECT_EQ(pair.model_b.potential({x, 0.0}), x * x);
  }
  // V̄ > λ off U.
  const Box dom = pair.model_b.geometry.domain();
  for (double x = dom.lo[0]; x <= dom.hi[0]; x += 0.001) {
    if (!pair.region.contains(Point{x, 0.0})) EXPECT_GT(pair.model_b.potential({x, 0.0}), 1.0);
  }
  const EquivalenceAudit audit = audit_equivalence(pair, 0.01);
  EXPECT_TRUE(audit.ok()) << audit.detail;
}

TEST(Compactify, DegenerateLevelGivesSmallRegion) {
  const EquivalentPair pair = compactify(harmonic1d(), 0.0, 0.5);
  EXPECT_TRUE(pair.region.contains(Point{0.0, 0.0}));
  EXPECT_LE(pair.region.width(0), 1.0 + 1e-12);
  EXPECT_TRUE(audit_equivalence(pair, 0.01).ok());
}

TEST(Compactify, PlaneToTorusMatchesNodewise) {
  const EquivalentPair pair = compactify(harmonic2d(), 1.0, 2.0);
  EXPECT_EQ(pair.model_b.geometry.kind, GeometryKind::Torus2D);
  const EquivalenceAudit audit = audit_equivalence(pair, 0.05);
  EXPECT_TRUE(audit.ok()) << audit.detail;
  EXPECT_EQ(audit.max_potential_mismatch, 0.0);
  EXPECT_GT(audit.nodes_checked, 100u);
}

TEST(Compactify, RejectsCompactInput) {
  EXPECT_THROW(compactify({Geometry::circle(1.0), Potential::constant(1, 0.0)}, 1.0, 1.0), ConfigError);
  EXPECT_THROW(compactify(harmonic1d(), 1.0, 0.0), ConfigError);
}

TEST(Equivalence, DetectsPotentialMismatch) {
  EquivalentPair pair = compactify(harmonic1d(), 1.0, 2.0);
  pair.model_b.potential = Potential::patched(Potential::harmonic({1.1}), pair.region, 3.0, 1.0);
  EXPECT_FALSE(audit_equivalence(pair, 0.01).potential_match);
}

TEST(Equivalence, DetectsSublevelOutsideRegion) {
  EquivalentPair pair = compactify(harmonic1d(), 1.0, 2.0);
  pair.region = Box::interval(-0.5, 0.5);
  EXPECT_FALSE(audit_equivalence(pair, 0.01).sublevel_inside_region);
}
