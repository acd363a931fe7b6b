// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "rwre/error.hpp"

namespace rwre::env {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> parse_numbers(std::string_view text, std::string_view whole) {
  std::vector<double> out;
  std::string s(text);
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument("trailing");
    } catch (const std::logic_error&) {
      throw ConfigError("bad number in distribution descriptor '" + std::string(whole) + "'");
    }
  }
  return out;
}

// Floor keeps extreme gamma underflows strictly positive.
double floor_positive(double x) { return std::max(x, std::numeric_limits<double>::min()); }

double total(std::span<const double> a) { return std::accumulate(a.begin(), a.end(), 0.0); }

}  // namespace

void validate_law(const Law& law) {
  if (const auto* l = std::get_if<LerrwLaw>(&law)) {
    if (!(l->delta > 0.0) || !std::isfinite(l->delta)) {
      throw ConfigError("lerrw reinforcement must be positive");
    }
    return;
  }
  const auto& g = std::get<GenericLaw>(law);
  const bool ok = [&] {
    switch (g.kind) {
      case GenericLaw::Kind::kConstant: return g.first > 0.0 && std::isfinite(g.first);
      case GenericLaw::Kind::kUniform:
        return g.first >= 0.0 && g.second > g.first && std::isfinite(g.second);
      case GenericLaw::Kind::kGamma:
        return g.first > 0.0 && g.second > 0.0 && std::isfinite(g.first) &&
               std::isfinite(g.second);
      case GenericLaw::Kind::kLognormal:
        return std::isfinite(g.first) && g.second > 0.0 && std::isfinite(g.second);
    }
    return false;
  }();
  if (!ok) throw ConfigError("invalid parameters for " + format_law(law));
}

Law parse_law(std::string_view descriptor) {
  const auto colon = descriptor.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("distribution descriptor needs 'kind:params': '" + std::string(descriptor) + "'");
  }
  const auto kind = descriptor.substr(0, colon);
  const auto params = parse_numbers(descriptor.substr(colon + 1), descriptor);
  auto expect = [&](std::size_t n) {
    if (params.size() != n) {
      throw ConfigError("wrong parameter count in '" + std::string(descriptor) + "'");
    }
  };
  auto checked = [](Law law) {
    validate_law(law);
    return law;
  };
  using K = GenericLaw::Kind;
  if (kind == "const") {
    expect(1);
    return checked(GenericLaw{K::kConstant, params[0], 0.0});
  }
  if (kind == "uniform") {
    expect(2);
    return checked(GenericLaw{K::kUniform, params[0], params[1]});
  }
  if (kind == "gamma") {
    expect(2);
    return checked(GenericLaw{K::kGamma, params[0], params[1]});
  }
  if (kind == "lognormal") {
    expect(2);
    return checked(GenericLaw{K::kLognormal, params[0], params[1]});
  }
  if (kind == "lerrw") {
    expect(1);
    return checked(LerrwLaw{params[0]});
  }
  throw ConfigError("unsupported distribution '" + std::string(kind) + "'");
}

std::string format_law(const Law& law) {
  std::ostringstream out;
  out.precision(17);
  if (const auto* l = std::get_if<LerrwLaw>(&law)) {
    out << "lerrw:" << l->delta;
    return out.str();
  }
  const auto& g = std::get<GenericLaw>(law);
  switch (g.kind) {
    case GenericLaw::Kind::kConstant: out << "const:" << g.first; break;
    case GenericLaw::Kind::kUniform: out << "uniform:" << g.first << ',' << g.second; break;
    case GenericLaw::Kind::kGamma: out << "gamma:" << g.first << ',' << g.second; break;
    case GenericLaw::Kind::kLognormal: out << "lognormal:" << g.first << ',' << g.second; break;
  }
  return out.str();
}

EnvSpec EnvSpec::parse(std::string_view descriptor, int b, std::uint64_t seed) {
  EnvSpec spec{parse_law(descriptor), b, seed, std::nullopt};
  spec.validate();
  return spec;
}

void EnvSpec::validate() const {
  if (b < 1) throw ConfigError("branching number b must be >= 1");
  if (root_epsilon && !(*root_epsilon > 0.0 && *root_epsilon < 1.0)) {
    throw ConfigError("root epsilon must lie in (0, 1)");
  }
  validate_law(law);
}

ProbVector transition_probs(std::span<const double> weights) {
  double sum = 0.0;
  for (double a : weights) {
    if (!std::isfinite(a) || !(a > 0.0)) {
      throw InvalidInput("weights must be positive and finite");
    }
    sum += a;
  }
  const double norm = 1.0 / (1.0 + sum);
  ProbVector p;
  p.to_parent = norm;
  p.to_child.reserve(weights.size());
  for (double a : weights) p.to_child.push_back(a * norm);
  return p;
}

void draw_weights(const EnvSpec& spec, SplitMix64& engine, std::span<double> out) {
  if (const auto* l = std::get_if<LerrwLaw>(&spec.law)) {
    // Normalising the Dirichlet cancels in the ratios Z_i / Z_0.
    std::gamma_distribution<double> parent_gamma(l->parent_parameter(), 1.0);
    std::gamma_distribution<double> child_gamma(l->child_parameter(), 1.0);
    const double g0 = floor_positive(parent_gamma(engine));
    for (double& a : out) a = floor_positive(child_gamma(engine)) / g0;
    return;
  }
  const auto& g = std::get<GenericLaw>(spec.law);
  switch (g.kind) {
    case GenericLaw::Kind::kConstant:
      std::fill(out.begin(), out.end(), g.first);
      return;
    case GenericLaw::Kind::kUniform: {
      std::uniform_real_distribution<double> d(g.first, g.second);
      for (double& a : out) a = floor_positive(d(engine));
      return;
    }
    case GenericLaw::Kind::kGamma: {
      std::gamma_distribution<double> d(g.first, g.second);
      for (double& a : out) a = floor_positive(d(engine));
      return;
    }
    case GenericLaw::Kind::kLognormal: {
      std::lognormal_distribution<double> d(g.first, g.second);
      for (double& a : out) a = floor_positive(d(engine));
      return;
    }
  }
}

void sample_weights_into(const EnvSpec& spec, std::uint64_t vertex_key, bool is_root,
                         std::span<double> out) {
  SplitMix64 engine(hash_words(spec.seed, static_cast<std::uint64_t>(StreamTag::kWeights),
                               vertex_key));
  draw_weights(spec, engine, out);
  if (is_root && spec.root_epsilon) {
    // omega(root, parent) = 1 / (1 + sum A) <= 1 - eps  <=>  sum A >= eps / (1 - eps).
    const double eps = *spec.root_epsilon;
    const double needed = eps / (1.0 - eps);
    for (int tries = 0; total(out) < needed; ++tries) {
      if (tries > 100000) throw ConfigError("root conditioning rejects every draw");
      draw_weights(spec, engine, out);
    }
  }
}

WeightVector sample_weights(const EnvSpec& spec, const VertexPath& v) {
  if (v.is_sentinel()) throw InvalidInput("the parent-of-root sentinel carries no weights");
  WeightVector w{std::vector<double>(static_cast<std::size_t>(spec.b))};
  sample_weights_into(spec, v.key(), v.is_root(), w.a);
  return w;
}

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::kFractionalMomentInf: return "fractional_moment_inf";
    case Quantity::kNegativeMoment: return "negative_moment";
    case Quantity::kBetaNegativeMoment: return "beta_negative_moment";
    case Quantity::kGammaIndicatorMoment: return "gamma_indicator_moment";
    case Quantity::kEmpiricalMoment: return "empirical_moment";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kClosedForm: return "closed_form";
    case Method::kMonteCarlo: return "monte_carlo";
    case Method::kQuadrature: return "quadrature";
    case Method::kImportanceSampling: return "importance_sampling";
  }
  return "?";
}

double lerrw_fractional_moment(const LerrwLaw& law, double t) {
  // E[(Z_i/Z_0)^t] = Gamma(a_i + t) Gamma(a_0 - t) / (Gamma(a_i) Gamma(a_0)).
  const double a0 = law.parent_parameter();
  const double ai = law.child_parameter();
  if (t >= a0) return kInf;
  return std::exp(std::lgamma(ai + t) + std::lgamma(a0 - t) - std::lgamma(ai) -
                  std::lgamma(a0));
}

MomentReport check_assumption_a(const EnvSpec& spec, int t_grid_size, long n_samples) {
  if (t_grid_size < 2) throw InvalidInput("t grid needs at least 2 points");
  spec.validate();
  MomentReport report;
  report.quantity = Quantity::kFractionalMomentInf;

  std::vector<double> grid(static_cast<std::size_t>(t_grid_size));
  for (int j = 0; j < t_grid_size; ++j) grid[j] = static_cast<double>(j) / (t_grid_size - 1);

  std::vector<double> means(grid.size());
  std::vector<double> errors(grid.size(), 0.0);
  const auto* generic = std::get_if<GenericLaw>(&spec.law);
  if (const auto* l = std::get_if<LerrwLaw>(&spec.law)) {
    report.method = Method::kClosedForm;
    for (std::size_t j = 0; j < grid.size(); ++j) means[j] = lerrw_fractional_moment(*l, grid[j]);
  } else if (generic->kind == GenericLaw::Kind::kConstant) {
    report.method = Method::kClosedForm;
    for (std::size_t j = 0; j < grid.size(); ++j) means[j] = std::pow(generic->first, grid[j]);
  } else {
    if (n_samples < 2) throw InvalidInput("Monte Carlo needs at least 2 samples");
    report.method = Method::kMonteCarlo;
    report.n_samples = n_samples;
    // One coordinate per draw; common random numbers across the grid.
    SplitMix64 engine(derive_seed(spec.seed, StreamTag::kMonteCarlo, 0xA55));
    EnvSpec one = spec;
    one.b = 1;
    std::vector<double> a(static_cast<std::size_t>(n_samples));
    for (double& x : a) draw_weights(one, engine, std::span<double>(&x, 1));
    std::vector<double> powered(a.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      std::transform(a.begin(), a.end(), powered.begin(),
                     [t = grid[j]](double x) { return std::pow(x, t); });
      const auto me = mean_and_error(powered);
      if (!std::isfinite(me.mean)) {
        throw HeavyTailError("non-finite Monte Carlo estimate of E[A^t]");
      }
      means[j] = me.mean;
      errors[j] = me.std_error;
    }
  }
  const auto best = std::min_element(means.begin(), means.end()) - means.begin();
  report.estimate = means[best];
  report.std_error = errors[best];
  report.argmin_t = grid[best];
  report.pass = report.estimate > 1.0 / spec.b;
  return report;
}

MomentReport negative_moment_mc(const EnvSpec& spec, double p, long n_samples) {
  if (n_samples < 100) throw InvalidInput("negative_moment_mc needs n_samples >= 100");
  if (!(p > 0.0)) throw InvalidInput("exponent p must be positive");
  spec.validate();
  SplitMix64 engine(derive_seed(spec.seed, StreamTag::kMonteCarlo, 0x5EC));
  std::vector<double> w(static_cast<std::size_t>(spec.b));
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (double& v : values) {
    draw_weights(spec, engine, w);
    v = std::pow(total(w), -p);
  }
  MomentReport report;
  report.quantity = Quantity::kNegativeMoment;
  report.method = Method::kMonteCarlo;
  report.n_samples = n_samples;
  const auto me = mean_and_error(values);
  report.estimate = me.mean;
  report.std_error = me.std_error;
  report.infinite = !std::isfinite(me.mean);
  report.stability = diagnose_mean(values);
  return report;
}

MomentReport negative_moment_is(const EnvSpec& spec, double p, long n_samples) {
  if (n_samples < 100) throw InvalidInput("negative_moment_is needs n_samples >= 100");
  if (!(p > 0.0)) throw InvalidInput("exponent p must be positive");
  spec.validate();
  const auto* law = std::get_if<LerrwLaw>(&spec.law);
  if (law == nullptr) throw ConfigError("importance sampling needs a lerrw law");
  // sum A = G0 / S with G0 ~ Gamma(a) and S ~ Gamma(c) independent. S is drawn
  // from Gamma(c') and reweighted; for p < c < 2p this gives finite variance.
  const double a = law->parent_parameter();
  const double c = spec.b * law->child_parameter();
  double shape = c;
  if (c <= p) {
    shape = 0.5 * c;
  } else if (c <= 2.0 * p) {
    shape = 1.5 * (c - p);
  }
  const double log_ratio = std::lgamma(shape) - std::lgamma(c);
  SplitMix64 engine(derive_seed(spec.seed, StreamTag::kMonteCarlo, 0x15));
  std::gamma_distribution<double> parent_gamma(a, 1.0);
  std::gamma_distribution<double> child_mass(shape, 1.0);
  std::vector<double> values(static_cast<std::size_t>(n_samples));
  for (double& v : values) {
    const double g0 = parent_gamma(engine);
    const double mass = child_mass(engine);
    v = std::exp(p * (std::log(g0) - std::log(mass)) + (c - shape) * std::log(mass) + log_ratio);
  }
  MomentReport report;
  report.quantity = Quantity::kNegativeMoment;
  report.method = Method::kImportanceSampling;
  report.n_samples = n_samples;
  const auto me = mean_and_error(values);
  report.estimate = me.mean;
  report.std_error = me.std_error;
  report.infinite = !std::isfinite(me.mean);
  report.stability = diagnose_mean(values);
  return report;
}

MomentReport lerrw_negative_moment_cf(int b, double delta, double p) {
  if (b < 2) throw InvalidInput("closed form needs b >= 2");
  if (!(delta > 0.0) || !(p > 0.0)) throw InvalidInput("delta and p must be positive");
  const double a = (1.0 + delta) / (2.0 * delta);
  const double c = b / (2.0 * delta);
  MomentReport report;
  report.quantity = Quantity::kNegativeMoment;
  report.method = Method::kClosedForm;
  if (c - p <= 0.0) {
    report.infinite = true;
    report.estimate = kInf;
    return report;
  }
  // B(a+p, c-p) / B(a, c); the Gamma(a+c) terms cancel.
  report.estimate = std::exp(std::lgamma(a + p) + std::lgamma(c - p) - std::lgamma(a) -
                             std::lgamma(c));
  return report;
}

}  // namespace rwre::env
