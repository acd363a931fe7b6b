// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "rwre/error.hpp"

namespace rwre::stats {
namespace {

double sample_variance(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0);
}

// Bounds [begin, end) of batch j when n items are split into `batches`.
std::pair<std::size_t, std::size_t> batch_bounds(std::size_t n, int batches, int j) {
  const auto lo = n * static_cast<std::size_t>(j) / static_cast<std::size_t>(batches);
  const auto hi = n * static_cast<std::size_t>(j + 1) / static_cast<std::size_t>(batches);
  return {lo, hi};
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double kolmogorov_sf(double lambda) {
  constexpr int kTerms = 100;
  constexpr double kTol = 1e-10;
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    // The alternating series converges slowly here; use the theta-function form of the CDF.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double cdf = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
      const double odd = 2.0 * k - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * lambda * lambda));
      cdf += term;
      if (term < kTol * cdf) break;
    }
    cdf *= std::sqrt(2.0 * std::numbers::pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= kTerms; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < kTol) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
  if (dof <= 0.0) throw InvalidInput("chi-square needs dof > 0");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

SpeedEstimate estimate_speed(const regen::GapSample& gaps) {
  const std::size_t n = gaps.size();
  if (n < static_cast<std::size_t>(kBatchCount)) {
    throw InsufficientData("speed estimate needs at least 16 gaps, got " + std::to_string(n));
  }
  const double total_levels =
      static_cast<double>(std::accumulate(gaps.level_gaps.begin(), gaps.level_gaps.end(), 0L));
  const double total_time =
      static_cast<double>(std::accumulate(gaps.time_gaps.begin(), gaps.time_gaps.end(), 0L));
  SpeedEstimate s;
  s.n_gaps = static_cast<long>(n);
  s.v_hat = total_levels / total_time;
  std::vector<double> batch(kBatchCount);
  for (int j = 0; j < kBatchCount; ++j) {
    const auto [lo, hi] = batch_bounds(n, kBatchCount, j);
    double l = 0.0, t = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      l += static_cast<double>(gaps.level_gaps[i]);
      t += static_cast<double>(gaps.time_gaps[i]);
    }
    batch[static_cast<std::size_t>(j)] = l / t;
  }
  const double se = std::sqrt(sample_variance(batch) / kBatchCount);
  s.ci_low = s.v_hat - kZ99 * se;
  s.ci_high = s.v_hat + kZ99 * se;
  return s;
}

std::string_view to_string(SigmaMethod m) {
  return m == SigmaMethod::kRegenerationBlocks ? "regeneration_blocks" : "direct_variance";
}

SigmaEstimate estimate_sigma(const regen::GapSample& gaps, double v) {
  if (!(v > 0.0 && v <= 1.0)) throw InvalidInput("sigma estimate needs v in (0, 1]");
  const std::size_t n = gaps.size();
  if (n < static_cast<std::size_t>(kBatchCount)) {
    throw InsufficientData("sigma estimate needs at least 16 gaps, got " + std::to_string(n));
  }
  std::vector<double> y(n);
  double time_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<double>(gaps.level_gaps[i]) - v * static_cast<double>(gaps.time_gaps[i]);
    time_sum += static_cast<double>(gaps.time_gaps[i]);
  }
  const double var = sample_variance(y);
  if (!(var > 1e-14)) {
    throw DegenerateData("block increments have zero variance; sigma is not positive");
  }
  SigmaEstimate s;
  s.method = SigmaMethod::kRegenerationBlocks;
  s.n = static_cast<long>(n);
  s.sigma_hat = std::sqrt(var / (time_sum / static_cast<double>(n)));

  std::vector<double> batch;
  for (int j = 0; j < kBatchCount; ++j) {
    const auto [lo, hi] = batch_bounds(n, kBatchCount, j);
    if (hi - lo < 2) continue;
    const std::span<const double> part(y.data() + lo, hi - lo);
    double t = 0.0;
    for (std::size_t i = lo; i < hi; ++i) t += static_cast<double>(gaps.time_gaps[i]);
    batch.push_back(sample_variance(part) / (t / static_cast<double>(hi - lo)));
  }
  if (batch.size() >= 2) {
    const double se_sq = std::sqrt(sample_variance(batch) / static_cast<double>(batch.size()));
    s.std_error = se_sq / (2.0 * s.sigma_hat);
  }
  return s;
}

SigmaEstimate direct_variance_sigma(std::span<const double> final_levels, long n) {
  if (n < 1) throw InvalidInput("direct variance needs n >= 1");
  const std::size_t w = final_levels.size();
  if (w < 2) throw InsufficientData("direct variance needs at least 2 walks");
  const double mean = std::accumulate(final_levels.begin(), final_levels.end(), 0.0) /
                      static_cast<double>(w);
  double m2 = 0.0, m4 = 0.0;
  for (double x : final_levels) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  const double var = m2 / static_cast<double>(w - 1);
  if (!(var > 0.0)) throw DegenerateData("final levels have zero variance");
  m2 /= static_cast<double>(w);
  m4 /= static_cast<double>(w);
  SigmaEstimate s;
  s.method = SigmaMethod::kDirectVariance;
  s.n = static_cast<long>(w);
  s.sigma_hat = std::sqrt(var / static_cast<double>(n));
  const double se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(w));
  s.std_error = se_var / static_cast<double>(n) / (2.0 * s.sigma_hat);
  return s;
}

std::string_view to_string(TailMethod m) {
  return m == TailMethod::kGeometricMle ? "geometric_mle" : "log_survival_regression";
}

GeometricTailReport fit_geometric_tail(std::span<const long> level_gaps) {
  const std::size_t n = level_gaps.size();
  if (static_cast<long>(n) < kMinTailSample) {
    throw InsufficientData("tail fit needs at least 1000 gaps, got " + std::to_string(n));
  }
  long max_gap = 0;
  double excess = 0.0;
  for (long g : level_gaps) {
    if (g < 1) throw InvalidInput("level gaps must be >= 1");
    max_gap = std::max(max_gap, g);
    excess += static_cast<double>(g - 1);
  }
  if (std::all_of(level_gaps.begin(), level_gaps.end(),
                  [&](long g) { return g == level_gaps[0]; })) {
    throw DegenerateData("all level gaps are equal");
  }
  GeometricTailReport r;
  r.n = static_cast<long>(n);
  const double m = excess / static_cast<double>(n);
  r.mle = {m / (1.0 + m), 1.0, 1, max_gap, TailMethod::kGeometricMle};

  std::vector<long> exceed(static_cast<std::size_t>(max_gap) + 2, 0);
  for (long g : level_gaps) ++exceed[static_cast<std::size_t>(g)];
  for (long k = max_gap - 1; k >= 1; --k) {
    exceed[static_cast<std::size_t>(k)] += exceed[static_cast<std::size_t>(k + 1)];
  }
  std::vector<double> ks, ys;
  for (long k = 1; k <= max_gap && exceed[static_cast<std::size_t>(k)] >= kMinExceedances; ++k) {
    ks.push_back(static_cast<double>(k));
    ys.push_back(std::log(static_cast<double>(exceed[static_cast<std::size_t>(k)]) /
                          static_cast<double>(n)));
  }
  if (ks.size() < 3) {
    throw DegenerateData("log-survival regression needs three k values with 30 exceedances");
  }
  const double kn = static_cast<double>(ks.size());
  const double kbar = std::accumulate(ks.begin(), ks.end(), 0.0) / kn;
  const double ybar = std::accumulate(ys.begin(), ys.end(), 0.0) / kn;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - kbar) * (ys[i] - ybar);
    sxx += (ks[i] - kbar) * (ks[i] - kbar);
    syy += (ys[i] - ybar) * (ys[i] - ybar);
  }
  const double slope = sxy / sxx;
  r.regression.method = TailMethod::kLogSurvivalRegression;
  r.regression.a_hat = std::exp(slope);
  r.regression.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  r.regression.k_min = static_cast<long>(ks.front());
  r.regression.k_max = static_cast<long>(ks.back());
  return r;
}

NormalityReport ks_normality_test(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 100) throw InsufficientData("KS test needs at least 100 samples");
  std::vector<double> x(samples.begin(), samples.end());
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput("KS test sample is not finite");
  }
  std::sort(x.begin(), x.end());
  const double dn = static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = normal_cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / dn - f, f - static_cast<double>(i) / dn});
  }
  return {d, kolmogorov_sf(std::sqrt(dn) * d), static_cast<long>(n)};
}

TwoSampleReport ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("two-sample KS needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  return {d, kolmogorov_sf(std::sqrt(ne) * d), static_cast<long>(x.size()),
          static_cast<long>(y.size())};
}

bool FcltReport::normality_passes() const {
  return std::all_of(increments.begin(), increments.end(),
                     [&](const NormalityReport& r) { return r.p_value >= level; });
}

bool FcltReport::correlation_passes() const {
  return std::all_of(correlations.begin(), correlations.end(),
                     [&](double c) { return std::abs(c) <= correlation_bound; });
}

FcltReport fclt_increment_test(std::span<const std::array<double, 4>> levels, long n, double v,
                               double sigma, double level) {
  if (static_cast<long>(levels.size()) < kMinFcltWalks) {
    throw InsufficientData("FCLT test needs at least 500 walks, got " +
                           std::to_string(levels.size()));
  }
  if (n < 4 || !(sigma > 0.0)) throw InvalidInput("FCLT test needs n >= 4 and sigma > 0");
  const std::size_t w = levels.size();
  std::array<std::vector<double>, 4> inc;
  long prev_step = 0;
  for (int j = 0; j < 4; ++j) {
    const long step = static_cast<long>(std::floor(static_cast<double>(n) * kFcltTimes[j]));
    const double dt = static_cast<double>(step - prev_step);
    const double scale = sigma * std::sqrt(dt);
    inc[j].resize(w);
    for (std::size_t i = 0; i < w; ++i) {
      const double before = j == 0 ? 0.0 : levels[i][j - 1];
      inc[j][i] = (levels[i][j] - before - v * dt) / scale;
    }
    prev_step = step;
  }
  FcltReport r;
  r.walks = static_cast<long>(w);
  r.level = level;
  r.correlation_bound = 3.0 / std::sqrt(static_cast<double>(w));
  for (int j = 0; j < 4; ++j) r.increments[j] = ks_normality_test(inc[j]);
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) {
      const double ma = std::accumulate(inc[a].begin(), inc[a].end(), 0.0) / static_cast<double>(w);
      const double mb = std::accumulate(inc[b].begin(), inc[b].end(), 0.0) / static_cast<double>(w);
      double sab = 0.0, saa = 0.0, sbb = 0.0;
      for (std::size_t i = 0; i < w; ++i) {
        sab += (inc[a][i] - ma) * (inc[b][i] - mb);
        saa += (inc[a][i] - ma) * (inc[a][i] - ma);
        sbb += (inc[b][i] - mb) * (inc[b][i] - mb);
      }
      r.correlations.push_back(sab / std::sqrt(saa * sbb));
      r.pairs.emplace_back(a, b);
    }
  }
  return r;
}

MomentEstimate empirical_moment(std::span<const double> samples, double p) {
  if (samples.size() < 100) throw InsufficientData("empirical moment needs at least 100 samples");
  if (!(p > 0.0)) throw InvalidInput("moment order must be positive");
  std::vector<double> powered(samples.size());
  std::transform(samples.begin(), samples.end(), powered.begin(),
                 [p](double x) { return std::pow(std::abs(x), p); });
  MomentEstimate m;
  m.p = p;
  m.n = static_cast<long>(samples.size());
  const auto me = mean_and_error(powered);
  m.estimate = me.mean;
  m.std_error = me.std_error;
  m.stability = diagnose_mean(powered);
  return m;
}

ContingencyTest chi_square_independence(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw InvalidInput("paired samples differ in length");
  if (x.empty()) throw InsufficientData("independence test needs data");
  std::map<int, std::size_t> xs, ys;
  for (int v : x) xs.emplace(v, 0);
  for (int v : y) ys.emplace(v, 0);
  std::size_t idx = 0;
  for (auto& [k, i] : xs) i = idx++;
  idx = 0;
  for (auto& [k, i] : ys) i = idx++;
  std::vector<std::vector<long>> t(xs.size(), std::vector<long>(ys.size(), 0));
  for (std::size_t i = 0; i < x.size(); ++i) ++t[xs[x[i]]][ys[y[i]]];

  const double total = static_cast<double>(x.size());
  auto row_sums = [&] {
    std::vector<long> r(t.size(), 0);
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = std::accumulate(t[i].begin(), t[i].end(), 0L);
    return r;
  };
  auto col_sums = [&] {
    std::vector<long> c(t.empty() ? 0 : t[0].size(), 0);
    for (const auto& row : t) {
      for (std::size_t j = 0; j < row.size(); ++j) c[j] += row[j];
    }
    return c;
  };
  auto merge_target = [](const std::vector<long>& m, std::size_t i) {
    if (i == 0) return std::size_t{1};
    if (i + 1 == m.size()) return i - 1;
    return m[i - 1] <= m[i + 1] ? i - 1 : i + 1;
  };
  for (;;) {
    if (t.size() < 2 || t[0].size() < 2) {
      throw DegenerateData("independence test needs two categories on each axis");
    }
    const auto r = row_sums();
    const auto c = col_sums();
    const auto ri = static_cast<std::size_t>(std::min_element(r.begin(), r.end()) - r.begin());
    const auto ci = static_cast<std::size_t>(std::min_element(c.begin(), c.end()) - c.begin());
    if (static_cast<double>(r[ri]) * static_cast<double>(c[ci]) / total >= 5.0) break;
    if (r[ri] <= c[ci]) {
      const std::size_t into = merge_target(r, ri);
      for (std::size_t j = 0; j < t[ri].size(); ++j) t[into][j] += t[ri][j];
      t.erase(t.begin() + static_cast<std::ptrdiff_t>(ri));
    } else {
      const std::size_t into = merge_target(c, ci);
      for (auto& row : t) {
        row[into] += row[ci];
        row.erase(row.begin() + static_cast<std::ptrdiff_t>(ci));
      }
    }
  }
  const auto r = row_sums();
  const auto c = col_sums();
  double stat = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < t[i].size(); ++j) {
      const double e = static_cast<double>(r[i]) * static_cast<double>(c[j]) / total;
      const double d = static_cast<double>(t[i][j]) - e;
      stat += d * d / e;
    }
  }
  ContingencyTest out;
  out.statistic = stat;
  out.dof = static_cast<int>((t.size() - 1) * (t[0].size() - 1));
  out.p_value = chi_square_sf(stat, out.dof);
  out.table = std::move(t);
  return out;
}

GoodnessOfFit chi_square_gof(std::span<const long> observed, std::span<const double> probs,
                             int fitted_parameters) {
  if (observed.size() != probs.size() || observed.empty()) {
    throw InvalidInput("observed counts and probabilities differ in length");
  }
  const double psum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(psum - 1.0) > 1e-6) throw InvalidInput("model probabilities do not sum to 1");
  const double total =
      static_cast<double>(std::accumulate(observed.begin(), observed.end(), 0L));
  if (total <= 0.0) throw InsufficientData("goodness of fit needs data");
  std::vector<double> obs, expd;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o += static_cast<double>(observed[i]);
    e += probs[i] * total;
    if (e >= 5.0) {
      obs.push_back(o);
      expd.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (obs.empty()) {
      obs.push_back(o);
      expd.push_back(e);
    } else {
      obs.back() += o;
      expd.back() += e;
    }
  }
  GoodnessOfFit g;
  g.bins = static_cast<int>(obs.size());
  g.dof = g.bins - 1 - fitted_parameters;
  if (g.dof < 1) throw DegenerateData("goodness of fit has no degrees of freedom left");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double d = obs[i] - expd[i];
    g.statistic += d * d / expd[i];
  }
  g.p_value = chi_square_sf(g.statistic, g.dof);
  return g;
}

nlohmann::json to_json(const ReportEntry& e) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  };
  nlohmann::json j;
  j["name"] = e.name;
  j["quantity"] = e.quantity;
  j["estimate"] = number(e.estimate);
  j["ci"] = e.ci ? nlohmann::json::array({number((*e.ci)[0]), number((*e.ci)[1])})
                 : nlohmann::json(nullptr);
  j["n"] = e.n;
  j["method"] = e.method;
  j["p_value"] = e.p_value ? number(*e.p_value) : nlohmann::json(nullptr);
  j["pass"] = e.pass;
  return j;
}

}  // namespace rwre::stats
