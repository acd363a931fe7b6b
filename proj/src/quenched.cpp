// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/distributions/binomial.hpp>

#include "rwre/error.hpp"
#include "rwre/parallel.hpp"
#include "rwre/tree_walk.hpp"

namespace rwre::quenched {
namespace {

bool is_constant(const env::EnvSpec& spec) {
  const auto* g = std::get_if<env::GenericLaw>(&spec.law);
  return g != nullptr && g->kind == env::GenericLaw::Kind::kConstant;
}

// Scalar recursion: every vertex below v carries the same weights.
BetaValue beta_constant(const env::EnvSpec& spec, const VertexPath& v, int depth, double tol) {
  const auto top = env::sample_weights(spec, v).a;
  const double top_sum = [&] {
    double s = 0.0;
    for (double a : top) s += a;
    return s;
  }();
  const double below = static_cast<double>(spec.b) * std::get<env::GenericLaw>(spec.law).first;
  // Value at v with the boundary `d` levels down.
  auto value = [&](int d) {
    double x = 1.0;
    for (int k = 1; k < d; ++k) x = below * x / (1.0 + below * x);
    const double s = top_sum * x;
    return s / (1.0 + s);
  };
  BetaValue r;
  int d = depth;
  double current = value(d);
  for (;;) {
    const int next_depth = std::min(2 * d, kDepthCap);
    const double next = value(next_depth);
    r.upper_gap = std::abs(current - next);
    r.value = next;
    r.depth = next_depth;
    if (r.upper_gap < tol) {
      r.converged = true;
      break;
    }
    if (next_depth == kDepthCap) break;
    d = next_depth;
    current = next;
  }
  r.nodes = r.depth;
  return r;
}

// Explicit partial subtree below v; leaves carry the boundary value 1.
class ExploredTree {
 public:
  ExploredTree(const env::EnvSpec& spec, const VertexPath& v) : spec_(spec), b_(spec.b) {
    add(v.key(), 0);
    env::sample_weights_into(spec_, v.key(), v.is_root(), weights_of(0));
  }

  std::size_t size() const noexcept { return key_.size(); }
  double root_value() const noexcept { return value_[0]; }
  int max_depth() const noexcept { return max_depth_; }

  void expand(std::size_t node) {
    const auto first = static_cast<std::int64_t>(key_.size());
    const std::uint64_t parent_key = key_[node];
    const int d = depth_[node] + 1;
    for (int i = 1; i <= b_; ++i) {
      const std::size_t c = add(child_key(parent_key, i), d);
      env::sample_weights_into(spec_, key_[c], false, weights_of(c));
    }
    first_child_[node] = first;
    max_depth_ = std::max(max_depth_, d);
  }

  // Bottom-up values, then top-down sensitivities d(root)/d(node).
  void evaluate() {
    for (std::size_t n = key_.size(); n-- > 0;) {
      if (first_child_[n] < 0) {
        value_[n] = 1.0;
        continue;
      }
      const double* w = weights_.data() + n * static_cast<std::size_t>(b_);
      const auto c0 = static_cast<std::size_t>(first_child_[n]);
      double s = 0.0;
      for (int i = 0; i < b_; ++i) s += w[i] * value_[c0 + static_cast<std::size_t>(i)];
      sum_[n] = s;
      value_[n] = s / (1.0 + s);
    }
    sens_[0] = 1.0;
    for (std::size_t n = 0; n < key_.size(); ++n) {
      if (first_child_[n] < 0) continue;
      const double* w = weights_.data() + n * static_cast<std::size_t>(b_);
      const auto c0 = static_cast<std::size_t>(first_child_[n]);
      const double g = sens_[n] / ((1.0 + sum_[n]) * (1.0 + sum_[n]));
      for (int i = 0; i < b_; ++i) sens_[c0 + static_cast<std::size_t>(i)] = g * w[i];
    }
  }

  // Values of the root's children and their own gaps: frontier mass below
  // each child, measured relative to the child.
  std::vector<BetaValue> child_values() const {
    std::vector<BetaValue> out(static_cast<std::size_t>(b_));
    if (first_child_[0] < 0) return out;
    const auto c0 = static_cast<std::size_t>(first_child_[0]);
    std::vector<int> branch(key_.size(), -1);
    std::vector<double> mass(static_cast<std::size_t>(b_), 0.0);
    for (int i = 0; i < b_; ++i) branch[c0 + static_cast<std::size_t>(i)] = i;
    for (std::size_t n = c0; n < key_.size(); ++n) {
      const int br = branch[n];
      if (first_child_[n] < 0) {
        mass[static_cast<std::size_t>(br)] += sens_[n];
        continue;
      }
      const auto f = static_cast<std::size_t>(first_child_[n]);
      for (int i = 0; i < b_; ++i) branch[f + static_cast<std::size_t>(i)] = br;
    }
    for (int i = 0; i < b_; ++i) {
      const auto c = c0 + static_cast<std::size_t>(i);
      auto& v = out[static_cast<std::size_t>(i)];
      v.value = value_[c];
      v.upper_gap = sens_[c] > 0.0 ? mass[static_cast<std::size_t>(i)] / sens_[c] : 1.0;
      v.depth = max_depth_ - 1;
    }
    return out;
  }

  // Expands every leaf above the depth limit whose sensitivity exceeds the
  // threshold; returns the number expanded.
  long refine(double threshold, int depth_limit, long budget) {
    long expanded = 0;
    const std::size_t n = key_.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (first_child_[i] >= 0 || depth_[i] >= depth_limit || sens_[i] <= threshold) continue;
      if (static_cast<long>(key_.size()) + b_ > budget) break;
      expand(i);
      ++expanded;
    }
    return expanded;
  }

  double frontier_mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < key_.size(); ++i) {
      if (first_child_[i] < 0) m += sens_[i];
    }
    return m;
  }

 private:
  std::size_t add(std::uint64_t key, int depth) {
    key_.push_back(key);
    depth_.push_back(depth);
    first_child_.push_back(-1);
    value_.push_back(1.0);
    sum_.push_back(0.0);
    sens_.push_back(0.0);
    weights_.resize(weights_.size() + static_cast<std::size_t>(b_));
    return key_.size() - 1;
  }

  std::span<double> weights_of(std::size_t node) {
    return {weights_.data() + node * static_cast<std::size_t>(b_), static_cast<std::size_t>(b_)};
  }

  const env::EnvSpec& spec_;
  int b_;
  int max_depth_ = 0;
  std::vector<std::uint64_t> key_;
  std::vector<int> depth_;
  std::vector<std::int64_t> first_child_;
  std::vector<double> value_;
  std::vector<double> sum_;
  std::vector<double> sens_;
  std::vector<double> weights_;
};

BetaValue beta_adaptive(const env::EnvSpec& spec, const VertexPath& v, int depth, double tol,
                        std::vector<BetaValue>* children = nullptr) {
  ExploredTree tree(spec, v);
  tree.expand(0);
  tree.evaluate();
  BetaValue r;
  double previous = tree.root_value();
  int depth_limit = std::max(depth, 1);
  double threshold = 1e-2;
  for (int pass = 0; pass < 64; ++pass) {
    depth_limit = std::min(2 * depth_limit, kDepthCap);
    threshold *= 0.25;
    const long expanded = tree.refine(threshold, depth_limit, kNodeBudget);
    tree.evaluate();
    const double current = tree.root_value();
    // Linearised decrease still available if every leaf dropped from 1 to 0.
    const double remaining = tree.frontier_mass();
    r.upper_gap = std::max(previous - current, remaining);
    r.value = current;
    if (r.upper_gap < tol) {
      r.converged = true;
      break;
    }
    if (static_cast<long>(tree.size()) + spec.b > kNodeBudget) break;
    if (expanded == 0 && depth_limit == kDepthCap && threshold < 1e-300) break;
    previous = current;
  }
  r.depth = tree.max_depth();
  r.nodes = static_cast<long>(tree.size());
  if (children != nullptr) {
    *children = tree.child_values();
    for (auto& c : *children) c.converged = c.upper_gap < tol;
  }
  return r;
}

}  // namespace

BetaValue beta_at(const env::EnvSpec& spec, const VertexPath& v, int depth, double tol) {
  spec.validate();
  if (v.is_sentinel()) throw InvalidInput("beta is defined for tree vertices, not the sentinel");
  if (depth < 1) throw InvalidInput("beta needs depth >= 1");
  if (!(tol > 0.0)) throw InvalidInput("beta needs tol > 0");
  return is_constant(spec) ? beta_constant(spec, v, depth, tol) : beta_adaptive(spec, v, depth, tol);
}

double BetaFamily::residual() const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * children[i].value;
  return 1.0 / self.value - 1.0 - 1.0 / s;
}

BetaFamily beta_family(const env::EnvSpec& spec, const VertexPath& v, double tol) {
  spec.validate();
  if (v.is_sentinel()) throw InvalidInput("beta is defined for tree vertices, not the sentinel");
  if (!(tol > 0.0)) throw InvalidInput("beta needs tol > 0");
  BetaFamily f;
  f.weights = env::sample_weights(spec, v).a;
  if (is_constant(spec)) {
    f.self = beta_constant(spec, v, 1, tol);
    for (int i = 1; i <= spec.b; ++i) f.children.push_back(beta_constant(spec, v.child(i), 1, tol));
  } else {
    f.self = beta_adaptive(spec, v, 1, tol, &f.children);
  }
  return f;
}

GammaValue gamma_vertex(const env::ProbVector& probs, std::span<const double> child_betas) {
  if (child_betas.size() != probs.to_child.size()) {
    throw InvalidInput("gamma needs one beta per child");
  }
  double g = 0.0;
  for (std::size_t i = 0; i < child_betas.size(); ++i) {
    if (!(child_betas[i] >= 0.0 && child_betas[i] <= 1.0)) {
      throw InvalidInput("child betas must lie in [0, 1]");
    }
    g += probs.to_child[i] * child_betas[i];
  }
  return {g};
}

GeometricVisitsReport geometric_visits_check(const env::EnvSpec& spec, long trials,
                                             int escape_level, int threads) {
  if (trials < kMinVisitTrials) throw InvalidInput("geometric visits check needs trials >= 1000");
  if (escape_level < 1) throw InvalidInput("escape level must be >= 1");
  GeometricVisitsReport r;
  r.trials = trials;
  r.escape_level = escape_level;
  r.beta = beta_root(spec);
  if (!r.beta.converged) {
    r.skipped = true;
    r.skip_reason = "beta did not converge";
    return r;
  }
  if (r.beta.value < 1e-3) {
    r.skipped = true;
    r.skip_reason = "beta is zero: the walk returns to the parent forever";
    return r;
  }
  constexpr long kStepCap = 10'000'000;
  std::vector<long> visits(static_cast<std::size_t>(trials), 0);
  std::vector<char> finished(static_cast<std::size_t>(trials), 1);
  const std::uint64_t master = hash_words(spec.seed, static_cast<std::uint64_t>(StreamTag::kMonteCarlo));
  parallel_for(trials, threads, [&](long t) {
    const clocks::ClockField field(derive_seed(master, StreamTag::kClockSeed,
                                               static_cast<std::uint64_t>(t)));
    walk::Walker w(spec, field);
    long count = 0;
    while (w.level() < escape_level) {
      if (w.steps() >= kStepCap) {
        finished[static_cast<std::size_t>(t)] = 0;
        break;
      }
      w.step();
      if (w.at_sentinel()) ++count;
    }
    visits[static_cast<std::size_t>(t)] = count;
  });
  const long max_count = *std::max_element(visits.begin(), visits.end());
  r.counts.assign(static_cast<std::size_t>(max_count) + 2, 0);
  double total = 0.0;
  for (std::size_t t = 0; t < visits.size(); ++t) {
    ++r.counts[static_cast<std::size_t>(visits[t])];
    total += static_cast<double>(visits[t]);
    if (!finished[t]) ++r.unfinished;
  }
  r.mean_visits = total / static_cast<double>(trials);
  const double beta = r.beta.value;
  r.expected_mean = (1.0 - beta) / beta;
  std::vector<double> probs(r.counts.size());
  double q = 1.0;
  for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
    probs[k] = q * beta;
    q *= 1.0 - beta;
  }
  probs.back() = q;
  try {
    r.gof = stats::chi_square_gof(r.counts, probs, 0);
  } catch (const DegenerateData&) {
    // Everything pools into one bin: test the number of walks that came back.
    const long returned = trials - r.counts[0];
    const boost::math::binomial_distribution<double> law(static_cast<double>(trials), 1.0 - beta);
    const double lower = boost::math::cdf(law, static_cast<double>(returned));
    const double upper =
        returned == 0 ? 1.0 : boost::math::cdf(boost::math::complement(law, static_cast<double>(returned - 1)));
    r.gof = stats::GoodnessOfFit{static_cast<double>(returned), 0, std::min(1.0, 2.0 * std::min(lower, upper)), 1};
  }
  return r;
}

MomentBound geometric_moment_bound(double theta, double p) {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidInput("theta must lie in (0, 1)");
  if (!(p > 0.0)) throw InvalidInput("moment order must be positive");
  MomentBound m;
  m.lambda = -std::log1p(-theta);
  m.c_p = std::pow(p, p + 1.0) * std::exp(-p) + std::tgamma(p + 1.0);
  m.bound = 1.0 + m.c_p * theta / std::pow(m.lambda, p + 1.0);
  const double log_q = std::log1p(-theta);
  const double log_theta = std::log(theta);
  const double mode = p / m.lambda;
  double sum = 0.0;
  for (long k = 1;; ++k) {
    const double kd = static_cast<double>(k);
    const double term = std::exp(p * std::log(kd) + kd * log_q + log_theta);
    sum += term;
    if (kd > mode) {
      // Past the mode the terms fall at least geometrically with this ratio.
      const double ratio = std::pow((kd + 1.0) / kd, p) * (1.0 - theta);
      if (ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-12) break;
    }
  }
  m.exact = sum;
  return m;
}

BetaMomentResult negative_moment_of_beta(const env::EnvSpec& spec, double p, long n_envs,
                                         int depth, BetaMoment mode, double epsilon, double tol,
                                         int threads) {
  spec.validate();
  if (n_envs < 100) throw InvalidInput("negative moment of beta needs n_envs >= 100");
  if (!(p > 0.0)) throw InvalidInput("moment order must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidInput("epsilon must lie in (0, 1)");
  BetaMomentResult out;
  out.samples.resize(static_cast<std::size_t>(n_envs));
  std::vector<char> bad(static_cast<std::size_t>(n_envs), 0);
  parallel_for(n_envs, threads, [&](long i) {
    env::EnvSpec local = spec;
    local.seed = derive_seed(spec.seed, StreamTag::kEnvSeed, static_cast<std::uint64_t>(i));
    BetaSample& s = out.samples[static_cast<std::size_t>(i)];
    s.env_index = i;
    if (mode == BetaMoment::kBeta) {
      s.beta = beta_root(local, depth, tol);
      s.value = s.beta.value;
      bad[static_cast<std::size_t>(i)] = !s.beta.converged;
      return;
    }
    const VertexPath root = VertexPath::root();
    const auto probs = env::transition_probs(env::sample_weights(local, root));
    s.indicator = probs.to_parent <= 1.0 - epsilon;
    if (!s.indicator) return;
    std::vector<double> betas(static_cast<std::size_t>(spec.b));
    bool converged = true;
    for (int c = 1; c <= spec.b; ++c) {
      const auto bv = beta_at(local, root.child(c), depth, tol);
      betas[static_cast<std::size_t>(c - 1)] = bv.value;
      converged = converged && bv.converged;
      if (c == 1 || bv.upper_gap > s.beta.upper_gap) s.beta = bv;
    }
    s.value = gamma_vertex(probs, betas).value;
    bad[static_cast<std::size_t>(i)] = !converged;
  });
  out.non_converged = std::count(bad.begin(), bad.end(), 1);
  if (static_cast<double>(out.non_converged) > 0.01 * static_cast<double>(n_envs)) {
    throw DataQualityError(std::to_string(out.non_converged) + " of " + std::to_string(n_envs) +
                           " beta recursions did not converge");
  }
  std::vector<double> powered(static_cast<std::size_t>(n_envs));
  bool infinite = false;
  for (std::size_t i = 0; i < powered.size(); ++i) {
    const auto& s = out.samples[i];
    if (!s.indicator) {
      powered[i] = 0.0;
      continue;
    }
    powered[i] = s.value > 0.0 ? std::pow(s.value, -p) : INFINITY;
    infinite = infinite || !std::isfinite(powered[i]);
  }
  auto& rep = out.report;
  rep.quantity = mode == BetaMoment::kBeta ? env::Quantity::kBetaNegativeMoment
                                           : env::Quantity::kGammaIndicatorMoment;
  rep.method = env::Method::kMonteCarlo;
  rep.n_samples = n_envs;
  if (infinite) {
    rep.infinite = true;
    rep.estimate = INFINITY;
    rep.pass = false;
    return out;
  }
  const auto me = mean_and_error(powered);
  rep.estimate = me.mean;
  rep.std_error = me.std_error;
  rep.stability = diagnose_mean(powered);
  rep.pass = rep.stability->stable_under_doubling();
  return out;
}

void write_beta_csv(std::ostream& out, std::span<const BetaSample> samples) {
  out << "env_seed_index,beta,depth,gap\n";
  for (const auto& s : samples) {
    out << s.env_index << ',' << s.value << ',' << s.beta.depth << ',' << s.beta.upper_gap << '\n';
  }
}

}  // namespace rwre::quenched
