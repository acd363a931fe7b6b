// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Estimators and tests built on regeneration gaps and level samples.

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rwre/regen.hpp"
#include "rwre/stability.hpp"

namespace rwre::stats {

inline constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile
inline constexpr int kBatchCount = 16;

double normal_cdf(double x);
// P(K > lambda) for the Kolmogorov distribution.
double kolmogorov_sf(double lambda);
// Upper tail of the chi-square distribution.
double chi_square_sf(double x, double dof);

struct SpeedEstimate {
  double v_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  long n_gaps = 0;
};

// Ratio estimator with a 16-batch-means 99% interval.
SpeedEstimate estimate_speed(const regen::GapSample& gaps);

enum class SigmaMethod { kRegenerationBlocks, kDirectVariance };
std::string_view to_string(SigmaMethod m);

struct SigmaEstimate {
  double sigma_hat = 0.0;
  double std_error = 0.0;
  SigmaMethod method = SigmaMethod::kRegenerationBlocks;
  long n = 0;
};

// sigma^2 = Var(level_gap - v * time_gap) / mean(time_gap).
SigmaEstimate estimate_sigma(const regen::GapSample& gaps, double v);
// sigma^2 = Var(|X_n|) / n over independent walks observed at step n.
SigmaEstimate direct_variance_sigma(std::span<const double> final_levels, long n);

enum class TailMethod { kGeometricMle, kLogSurvivalRegression };
std::string_view to_string(TailMethod m);

struct TailFit {
  double a_hat = 0.0;
  double r_squared = 1.0;  // regression only
  long k_min = 0;
  long k_max = 0;
  TailMethod method = TailMethod::kGeometricMle;
};

struct GeometricTailReport {
  TailFit mle;
  TailFit regression;
  long n = 0;
};

inline constexpr long kMinTailSample = 1000;
inline constexpr long kMinExceedances = 30;

// MLE of a for P(gap - 1 >= k) = a^k, and the slope of ln P(gap >= k)
// against k over all k with at least 30 exceedances.
GeometricTailReport fit_geometric_tail(std::span<const long> level_gaps);

struct NormalityReport {
  double ks_statistic = 0.0;
  double p_value = 1.0;
  long n = 0;
};

// One-sample KS against N(0, 1).
NormalityReport ks_normality_test(std::span<const double> samples);

struct TwoSampleReport {
  double ks_statistic = 0.0;
  double p_value = 1.0;
  long n1 = 0;
  long n2 = 0;
};
TwoSampleReport ks_two_sample(std::span<const double> a, std::span<const double> b);

inline constexpr std::array<double, 4> kFcltTimes = {0.25, 0.5, 0.75, 1.0};

struct FcltReport {
  std::array<NormalityReport, 4> increments;
  // Correlations of disjoint increments, pairs (i, j) with i < j.
  std::vector<double> correlations;
  std::vector<std::pair<int, int>> pairs;
  double correlation_bound = 0.0;  // 3 / sqrt(walks)
  long walks = 0;
  double level = 0.01;

  bool normality_passes() const;
  bool correlation_passes() const;
  bool passes() const { return normality_passes() && correlation_passes(); }
};

inline constexpr long kMinFcltWalks = 500;

// `levels[w][j]` is |X| of walk w at floor(n * kFcltTimes[j]). Increments
// are centred with v and scaled by sigma * sqrt(n * dt).
FcltReport fclt_increment_test(std::span<const std::array<double, 4>> levels, long n, double v,
                               double sigma, double level = 0.01);

struct MomentEstimate {
  double p = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  long n = 0;
  StabilityDiagnostic stability;

  bool stable() const noexcept { return stability.stable_under_doubling(); }
};

// Mean of |x|^p with the stabilization diagnostic.
MomentEstimate empirical_moment(std::span<const double> samples, double p);

struct ContingencyTest {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::vector<std::vector<long>> table;
};

// Pearson chi-square test of independence of paired categories. Sparse
// categories are pooled with their neighbours until every expected count is
// at least 5. Throws DegenerateData when fewer than two categories remain
// on either axis.
ContingencyTest chi_square_independence(std::span<const int> x, std::span<const int> y);

struct GoodnessOfFit {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int bins = 0;
};

// Pearson goodness of fit of counts over categories 0..K-1 against model
// probabilities; the last probability should absorb the model's tail.
// Adjacent bins are pooled left to right until each expects at least 5.
GoodnessOfFit chi_square_gof(std::span<const long> observed, std::span<const double> probs,
                             int fitted_parameters = 0);

// One line of a JSON report.
struct ReportEntry {
  std::string name;
  std::string quantity;
  double estimate = 0.0;
  std::optional<std::array<double, 2>> ci;
  long n = 0;
  std::string method;
  std::optional<double> p_value;
  bool pass = true;
};

nlohmann::json to_json(const ReportEntry& e);

}  // namespace rwre::stats
