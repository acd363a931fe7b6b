// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Quantities of a fixed environment: the non-return probability beta, its
// companion gamma, the geometric law of visits to the root's parent and
// the moment bound for geometric variables.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/stats.hpp"

namespace rwre::quenched {

inline constexpr int kDepthCap = 1 << 14;
inline constexpr double kDefaultTol = 1e-6;
inline constexpr long kNodeBudget = 1L << 22;

// beta_v = P^v(never visit parent(v)). `value` is the probability of
// reaching relative depth `depth` before parent(v) on the explored part
// of the subtree, with unexplored vertices counted as escaping; it
// decreases to beta as the exploration grows. `upper_gap` estimates
// value - beta to first order from the sensitivity mass left on the frontier.
struct BetaValue {
  double value = 1.0;
  int depth = 0;
  double upper_gap = 0.0;
  bool converged = false;
  long nodes = 0;
};

// Refines until upper_gap < tol. Constant laws iterate the scalar map with
// depth doubling; random laws grow the explored tree where the root value
// is most sensitive, doubling the depth limit each pass.
BetaValue beta_at(const env::EnvSpec& spec, const VertexPath& v, int depth = 1,
                  double tol = kDefaultTol);
inline BetaValue beta_root(const env::EnvSpec& spec, int depth = 1, double tol = kDefaultTol) {
  return beta_at(spec, VertexPath::root(), depth, tol);
}

// beta at v together with the children's values read off the same
// exploration. Each child value is itself a boundary-one truncation for that
// child, with its own gap.
struct BetaFamily {
  BetaValue self;
  std::vector<double> weights;  // A_{v i}
  std::vector<BetaValue> children;

  // 1/beta - 1 - 1/(sum_i A_i beta_i)
  double residual() const;
};

BetaFamily beta_family(const env::EnvSpec& spec, const VertexPath& v, double tol = kDefaultTol);

struct GammaValue {
  double value = 0.0;
};

// gamma = sum_i omega(v, vi) beta_vi.
GammaValue gamma_vertex(const env::ProbVector& probs, std::span<const double> child_betas);

struct GeometricVisitsReport {
  bool skipped = false;
  std::string skip_reason;
  BetaValue beta;
  long trials = 0;
  int escape_level = 0;
  std::vector<long> counts;  // counts[k] = walks with k visits
  double mean_visits = 0.0;
  double expected_mean = 0.0;  // (1 - beta) / beta
  long unfinished = 0;         // walks stopped by the step cap
  // Chi-square over pooled visit counts; with a single pooled bin, an exact
  // binomial test on the number of walks that returned at least once.
  stats::GoodnessOfFit gof;

  bool passes(double level = 0.01) const { return !skipped && gof.p_value >= level; }
};

inline constexpr long kMinVisitTrials = 1000;

// Fixes the environment of `spec`, runs `trials` walks from the root with
// independent clocks until level `escape_level`, and fits the number of
// visits to the root's parent against Geometric(beta_root).
GeometricVisitsReport geometric_visits_check(const env::EnvSpec& spec, long trials,
                                             int escape_level = 200, int threads = 0);

struct MomentBound {
  double exact = 0.0;
  double bound = 0.0;
  double lambda = 0.0;
  double c_p = 0.0;
};

// E[Y^p] for Y ~ Geometric(theta) on {0, 1, ...} against
// 1 + C_p theta / lambda^(p+1), lambda = -ln(1 - theta),
// C_p = p^(p+1) e^(-p) + Gamma(p + 1).
MomentBound geometric_moment_bound(double theta, double p);

enum class BetaMoment { kBeta, kGammaIndicator };

inline constexpr double kGammaExponent = 28.0 / 9.0;
inline constexpr double kDefaultEpsilon = 0.3;

struct BetaSample {
  long env_index = 0;
  double value = 0.0;  // beta, or gamma (0 when the indicator is off)
  bool indicator = true;
  BetaValue beta;
};

struct BetaMomentResult {
  env::MomentReport report;
  std::vector<BetaSample> samples;
  long non_converged = 0;
};

// Environments derive from (spec.seed, i). kBeta: mean of beta_root^(-p).
// kGammaIndicator: mean of gamma_root^(-p) 1{omega(root, parent) <= 1 - eps}.
// Throws DataQualityError when more than 1% of betas fail to converge.
BetaMomentResult negative_moment_of_beta(const env::EnvSpec& spec, double p, long n_envs,
                                         int depth = 1, BetaMoment mode = BetaMoment::kBeta,
                                         double epsilon = kDefaultEpsilon,
                                         double tol = kDefaultTol, int threads = 0);

// "env_seed_index,beta,depth,gap".
void write_beta_csv(std::ostream& out, std::span<const BetaSample> samples);

}  // namespace rwre::quenched
