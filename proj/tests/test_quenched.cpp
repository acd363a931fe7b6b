// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rwre/error.hpp"
#include "rwre/quenched.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre::quenched {
namespace {

using env::EnvSpec;

// Fixed point of x -> c x / (1 + c x) by plain iteration.
double scalar_fixed_point(double c) {
  double x = 1.0;
  for (int i = 0; i < 100000; ++i) x = c * x / (1.0 + c * x);
  return x;
}

TEST(Beta, UnitWeightsBinaryTree) {
  const auto b = beta_root(EnvSpec::parse("const:1", 2, 0));
  EXPECT_TRUE(b.converged);
  EXPECT_NEAR(b.value, 0.5, 1e-6);
  EXPECT_NEAR(b.value, scalar_fixed_point(2.0), 1e-6);
  EXPECT_LT(b.upper_gap, kDefaultTol);
}

TEST(Beta, RecurrentHalfLineDoesNotConverge) {
  const auto b = beta_root(EnvSpec::parse("const:1", 1, 0));
  EXPECT_FALSE(b.converged);
  EXPECT_EQ(b.depth, kDepthCap);
  // Boundary-one truncation at depth D gives 1 / (D + 1).
  EXPECT_NEAR(b.value, 1.0 / (kDepthCap + 1.0), 1e-12);
}

TEST(Beta, SubThresholdConvergesToZero) {
  const auto b = beta_root(EnvSpec::parse("const:0.125", 2, 0));
  EXPECT_TRUE(b.converged);
  EXPECT_LT(b.value, 1e-6);
}

TEST(Beta, RefinementIsMonotone) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto spec = EnvSpec::parse("lerrw:1", 4, seed);
    double prev = 1.0;
    for (double tol : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
      const auto b = beta_root(spec, 1, tol);
      ASSERT_LE(b.value, prev + 1e-15);
      prev = b.value;
    }
  }
}

TEST(Beta, TighterToleranceStaysWithinReportedGap) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto spec = EnvSpec::parse("lerrw:1", 4, seed);
    const auto coarse = beta_root(spec, 1, 1e-3);
    const auto fine = beta_root(spec, 1, 1e-5);
    ASSERT_TRUE(coarse.converged && fine.converged);
    EXPECT_GE(coarse.value, fine.value);
    // upper_gap is a first-order estimate, accurate to tens of percent.
    EXPECT_LE(coarse.value - fine.value, 2.0 * (coarse.upper_gap + fine.upper_gap));
  }
}

TEST(Beta, RecursionIdentityAtTheRoot) {
  const double tol = 1e-5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = beta_family(EnvSpec::parse("lerrw:1", 3, seed), VertexPath::root(), tol);
    ASSERT_TRUE(f.self.converged);
    EXPECT_LT(std::abs(f.residual()), 10.0 * tol) << seed;
  }
}

TEST(Beta, FamilyChildrenAgreeWithIndependentRuns) {
  const double tol = 1e-5;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto spec = EnvSpec::parse("lerrw:1", 3, seed);
    const auto f = beta_family(spec, VertexPath::root(), tol);
    const auto w = env::sample_weights(spec, VertexPath::root()).a;
    ASSERT_EQ(f.weights, w);
    for (int i = 1; i <= 3; ++i) {
      const auto& c = f.children[static_cast<std::size_t>(i - 1)];
      const auto solo = beta_at(spec, VertexPath::root().child(i), 1, tol);
      EXPECT_LE(std::abs(c.value - solo.value), 2.0 * (c.upper_gap + solo.upper_gap))
          << seed << ' ' << i;
    }
  }
}

TEST(Beta, ConstantFamilySatisfiesTheScalarMap) {
  const auto f = beta_family(EnvSpec::parse("const:1", 2, 0), VertexPath::root(), 1e-9);
  EXPECT_NEAR(f.self.value, 0.5, 1e-9);
  EXPECT_LT(std::abs(f.residual()), 1e-8);
}

TEST(Beta, MatchesEscapeFrequency) {
  const auto spec = EnvSpec::parse("lerrw:1", 4, 6);
  const auto b = beta_root(spec);
  ASSERT_TRUE(b.converged);
  constexpr int n = 4000;
  long escaped = 0;
  for (int s = 0; s < n; ++s) {
    const clocks::ClockField field(derive_seed(99, StreamTag::kClockSeed, static_cast<std::uint64_t>(s)));
    walk::Walker w(spec, field);
    while (w.level() >= 0 && w.level() < 200) w.step();
    escaped += w.level() == 200;
  }
  const double p = static_cast<double>(escaped) / n;
  EXPECT_NEAR(p, b.value, 3.0 * std::sqrt(b.value * (1 - b.value) / n));
}

TEST(Beta, Preconditions) {
  const auto spec = EnvSpec::parse("const:1", 2, 0);
  EXPECT_THROW(beta_root(spec, 0), InvalidInput);
  EXPECT_THROW(beta_at(spec, VertexPath::parent_sentinel()), InvalidInput);
}

TEST(Gamma, HandValues) {
  env::ProbVector p{0.2, {0.2, 0.2, 0.2, 0.2}};
  const std::vector<double> half(4, 0.5);
  EXPECT_NEAR(gamma_vertex(p, half).value, 0.4, 1e-15);
  EXPECT_EQ(gamma_vertex(p, std::vector<double>(4, 0.0)).value, 0.0);
  EXPECT_THROW(gamma_vertex(p, std::vector<double>(3, 0.5)), InvalidInput);
  EXPECT_THROW(gamma_vertex(p, std::vector<double>{0.5, 0.5, 0.5, 1.5}), InvalidInput);
}

TEST(Gamma, BoundedByBetaAndChildMass) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto spec = EnvSpec::parse("lerrw:1", 4, seed);
    const auto root = VertexPath::root();
    const auto probs = env::transition_probs(env::sample_weights(spec, root));
    std::vector<double> betas;
    double child_mass = 0.0;
    for (int i = 1; i <= 4; ++i) {
      betas.push_back(beta_at(spec, root.child(i), 1, 1e-4).value);
      child_mass += probs.to_child[static_cast<std::size_t>(i - 1)];
    }
    const double g = gamma_vertex(probs, betas).value;
    EXPECT_LE(g, child_mass);
    EXPECT_LE(g, beta_root(spec, 1, 1e-4).value + 1e-4);
  }
}

TEST(GeometricVisits, UnitWeightsBinaryTree) {
  const auto r = geometric_visits_check(EnvSpec::parse("const:1", 2, 0), 4000, 100);
  ASSERT_FALSE(r.skipped);
  EXPECT_NEAR(r.beta.value, 0.5, 1e-6);
  EXPECT_GE(r.gof.p_value, 0.01);
  EXPECT_EQ(r.unfinished, 0);
  EXPECT_NEAR(r.mean_visits, 1.0, 0.1);
}

TEST(GeometricVisits, NearBallistic) {
  const auto r = geometric_visits_check(EnvSpec::parse("const:1000", 2, 0), 2000, 50);
  ASSERT_FALSE(r.skipped);
  EXPECT_LT(r.expected_mean, 1e-3);
  EXPECT_LT(r.mean_visits, 0.01);
  EXPECT_EQ(r.gof.bins, 1);
  EXPECT_TRUE(r.passes());
}

TEST(GeometricVisits, RecurrentIsSkipped) {
  const auto r = geometric_visits_check(EnvSpec::parse("const:1", 1, 0), 1000);
  EXPECT_TRUE(r.skipped);
  EXPECT_FALSE(r.passes());
  EXPECT_THROW(geometric_visits_check(EnvSpec::parse("const:1", 2, 0), 999), InvalidInput);
}

TEST(MomentBound, HalfAndFirstMoment) {
  const auto m = geometric_moment_bound(0.5, 1.0);
  EXPECT_NEAR(m.exact, 1.0, 1e-12);
  const double lambda = std::log(2.0);
  EXPECT_NEAR(m.bound, 1.0 + (std::exp(-1.0) + 1.0) * 0.5 / (lambda * lambda), 1e-12);
  EXPECT_NEAR(m.bound, 2.424, 1e-3);
  EXPECT_LE(m.exact, m.bound);
}

TEST(MomentBound, ClosedFormMoments) {
  // E[Y^2] = q(1+q)/theta^2 for Y ~ Geometric(theta) on {0, 1, ...}.
  for (double theta : {0.05, 0.3, 0.9}) {
    const double q = 1.0 - theta;
    EXPECT_NEAR(geometric_moment_bound(theta, 2.0).exact, q * (1 + q) / (theta * theta),
                1e-9 * q * (1 + q) / (theta * theta));
  }
}

TEST(MomentBound, NearCertainSuccess) {
  const auto m = geometric_moment_bound(1.0 - 1e-9, 2.0);
  EXPECT_LT(m.exact, 1e-8);
  EXPECT_GE(m.bound, 1.0);
  EXPECT_THROW(geometric_moment_bound(1.0, 1.0), InvalidInput);
  EXPECT_THROW(geometric_moment_bound(0.5, 0.0), InvalidInput);
}

TEST(MomentBound, FullGrid) {
  for (int i = 1; i <= 99; ++i) {
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      const auto m = geometric_moment_bound(i / 100.0, p);
      ASSERT_LE(m.exact, m.bound) << i << " " << p;
    }
  }
}

TEST(BetaMoment, ConstantEnvironmentIsExact) {
  const auto r = negative_moment_of_beta(EnvSpec::parse("const:1", 2, 0), 2.0, 100);
  EXPECT_NEAR(r.report.estimate, 4.0, 1e-4);
  EXPECT_EQ(r.non_converged, 0);
  EXPECT_EQ(r.report.quantity, env::Quantity::kBetaNegativeMoment);
  EXPECT_THROW(negative_moment_of_beta(EnvSpec::parse("const:1", 2, 0), 2.0, 99), InvalidInput);
}

TEST(BetaMoment, RecurrentEnvironmentsAreADataQualityProblem) {
  EXPECT_THROW(negative_moment_of_beta(EnvSpec::parse("const:1", 1, 0), 2.0, 100), DataQualityError);
}

TEST(BetaMoment, GammaIndicatorZeroOffTheEvent) {
  const auto r = negative_moment_of_beta(EnvSpec::parse("lerrw:1", 4, 3), kGammaExponent, 200, 1,
                                         BetaMoment::kGammaIndicator, 0.3, 1e-4);
  long on = 0;
  for (const auto& s : r.samples) {
    if (!s.indicator) {
      EXPECT_EQ(s.value, 0.0);
    } else {
      ++on;
      EXPECT_GT(s.value, 0.0);
    }
  }
  EXPECT_GT(on, 0);
  EXPECT_LT(on, 200);
  std::ostringstream csv;
  write_beta_csv(csv, r.samples);
  EXPECT_EQ(csv.str().substr(0, 30), "env_seed_index,beta,depth,gap\n");
}

}  // namespace
}  // namespace rwre::quenched
