// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Environment laws for the random walk on the b-regular tree. Each vertex
// v carries offspring weights A_v = (A_v1, ..., A_vb), drawn i.i.d. across
// vertices; the walk at v moves to child i with probability
// A_vi / (1 + sum A) and to the parent with probability 1 / (1 + sum A).

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rwre/stability.hpp"
#include "rwre/vertex.hpp"

namespace rwre::env {

// i.i.d. weights, one draw per child.
struct GenericLaw {
  enum class Kind { kConstant, kUniform, kGamma, kLognormal };
  Kind kind = Kind::kConstant;
  // const: (c, -); uniform: (lo, hi); gamma: (shape, scale); lognormal: (mu, s).
  double first = 1.0;
  double second = 0.0;
};

// Linearly edge-reinforced walk with reinforcement delta: Z_v ~ Dirichlet(
// (1+delta)/(2 delta), 1/(2 delta) x b) and A_vi = Z_vi / Z_v0.
struct LerrwLaw {
  double delta = 1.0;

  double parent_parameter() const noexcept { return (1.0 + delta) / (2.0 * delta); }
  double child_parameter() const noexcept { return 1.0 / (2.0 * delta); }
};

using Law = std::variant<GenericLaw, LerrwLaw>;

// Parses `const:c`, `uniform:lo,hi`, `gamma:k,theta`, `lognormal:mu,s` or
// `lerrw:delta`. Throws ConfigError.
Law parse_law(std::string_view descriptor);
std::string format_law(const Law& law);
void validate_law(const Law& law);

struct EnvSpec {
  Law law;
  int b = 2;
  std::uint64_t seed = 0;
  // When set, the root's weights are conditioned on
  // omega(root, parent) <= 1 - root_epsilon (by rejection).
  std::optional<double> root_epsilon;

  static EnvSpec parse(std::string_view descriptor, int b, std::uint64_t seed);
  // Throws ConfigError when b < 1, delta <= 0 or law parameters are invalid.
  // b = 1 (a half-line) is allowed for degenerate checks.
  void validate() const;
  bool is_lerrw() const noexcept { return std::holds_alternative<LerrwLaw>(law); }
};

struct WeightVector {
  std::vector<double> a;
};

struct ProbVector {
  double to_parent = 0.0;
  std::vector<double> to_child;
};

// Throws InvalidInput on a non-finite or non-positive weight.
ProbVector transition_probs(std::span<const double> weights);
inline ProbVector transition_probs(const WeightVector& w) { return transition_probs(w.a); }

// Draws one weight vector of the law into `out` (size b) from `engine`.
void draw_weights(const EnvSpec& spec, SplitMix64& engine, std::span<double> out);

// Deterministic in (spec, vertex key); `out` must have size spec.b.
void sample_weights_into(const EnvSpec& spec, std::uint64_t vertex_key, bool is_root,
                         std::span<double> out);
WeightVector sample_weights(const EnvSpec& spec, const VertexPath& v);

enum class Quantity {
  kFractionalMomentInf,
  kNegativeMoment,
  kBetaNegativeMoment,
  kGammaIndicatorMoment,
  kEmpiricalMoment,
};
enum class Method { kClosedForm, kMonteCarlo, kQuadrature, kImportanceSampling };

std::string_view to_string(Quantity q);
std::string_view to_string(Method m);

struct MomentReport {
  Quantity quantity = Quantity::kNegativeMoment;
  double estimate = 0.0;
  bool infinite = false;
  double std_error = 0.0;
  long n_samples = 0;
  Method method = Method::kClosedForm;
  // Assumption A: grid point achieving the minimum and the verdict against 1/b.
  std::optional<double> argmin_t;
  std::optional<bool> pass;
  std::optional<StabilityDiagnostic> stability;

  bool suspected_divergence() const noexcept {
    return infinite || (stability && stability->suspected_divergence());
  }
};

// min over t in {0, 1/(G-1), ..., 1} of E[A^t]; pass iff min > 1/b. Closed
// form for lerrw and constant laws, Monte Carlo otherwise (throws
// HeavyTailError on a non-finite estimate).
MomentReport check_assumption_a(const EnvSpec& spec, int t_grid_size, long n_samples);

// Monte Carlo E[(sum_i A_i)^(-p)] with stability diagnostic.
MomentReport negative_moment_mc(const EnvSpec& spec, double p, long n_samples);

// Same moment for lerrw laws with the Dirichlet child mass drawn from a
// heavier-at-zero Gamma proposal. The direct estimator has infinite variance
// when c < 2p (c = b / (2 delta)); this one keeps it finite for c > p.
MomentReport negative_moment_is(const EnvSpec& spec, double p, long n_samples);

// B(a + p, c - p) / B(a, c) with a = (1+delta)/(2 delta), c = b/(2 delta);
// infinite when c <= p.
MomentReport lerrw_negative_moment_cf(int b, double delta, double p);

// E[A^t] for one lerrw coordinate; +inf when t >= parent parameter.
double lerrw_fractional_moment(const LerrwLaw& law, double t);

}  // namespace rwre::env
