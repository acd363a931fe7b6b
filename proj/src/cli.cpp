// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include "rwre/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rwre/error.hpp"
#include "rwre/experiments.hpp"
#include "rwre/extension.hpp"
#include "rwre/hash.hpp"
#include "rwre/parallel.hpp"
#include "rwre/quenched.hpp"
#include "rwre/regen.hpp"

#ifndef RWRE_VERSION
#define RWRE_VERSION "unknown"
#endif

namespace rwre::cli {
namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("bad value for " + std::string(key) + ": '" + std::string(text) + "'");
  }
  return value;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view key, std::string_view)>;

template <typename T>
Setter number_field(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view key, std::string_view v) {
    c.*field = parse_number<T>(key, v);
  };
}

Setter text_field(std::string ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, std::string_view, std::string_view v) {
    c.*field = std::string(v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"env.law", text_field(&ExperimentConfig::law)},
      {"env.b", number_field(&ExperimentConfig::b)},
      {"env.seed", number_field(&ExperimentConfig::seed)},
      {"run.walks", number_field(&ExperimentConfig::walks)},
      {"run.n_steps", number_field(&ExperimentConfig::n_steps)},
      {"run.max_level", number_field(&ExperimentConfig::max_level)},
      {"run.guard", number_field(&ExperimentConfig::guard)},
      {"run.threads", number_field(&ExperimentConfig::threads)},
      {"moments.p", number_field(&ExperimentConfig::p)},
      {"moments.epsilon", number_field(&ExperimentConfig::epsilon)},
      {"moments.tol", number_field(&ExperimentConfig::tol)},
      {"moments.envs", number_field(&ExperimentConfig::envs)},
      {"moments.samples", number_field(&ExperimentConfig::samples)},
      {"coupling.trials", number_field(&ExperimentConfig::trials)},
      {"output.out_dir", text_field(&ExperimentConfig::out_dir)},
      {"output.stride", number_field(&ExperimentConfig::stride)},
  };
  return table;
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

stats::ReportEntry entry(std::string name, std::string quantity, double estimate, long n,
                         std::string method, bool pass) {
  stats::ReportEntry e;
  e.name = std::move(name);
  e.quantity = std::move(quantity);
  e.estimate = estimate;
  e.n = n;
  e.method = std::move(method);
  e.pass = pass;
  return e;
}

stats::ReportEntry moment_entry(std::string name, const env::MomentReport& m, bool pass) {
  auto e = entry(std::move(name), std::string(env::to_string(m.quantity)), m.estimate,
                 m.n_samples, std::string(env::to_string(m.method)), pass);
  if (m.std_error > 0.0 && std::isfinite(m.estimate)) {
    e.ci = {m.estimate - stats::kZ99 * m.std_error, m.estimate + stats::kZ99 * m.std_error};
  }
  return e;
}

stats::ReportEntry empirical_entry(std::string name, std::string quantity,
                                   const stats::MomentEstimate& m) {
  auto e = entry(std::move(name), std::move(quantity), m.estimate, m.n, "sample_doubling",
                 m.stable());
  e.ci = {m.estimate - stats::kZ99 * m.std_error, m.estimate + stats::kZ99 * m.std_error};
  return e;
}

std::ofstream open_output(const ExperimentConfig& c, const std::string& name) {
  const fs::path path = fs::path(c.out_dir) / name;
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void simulate(const ExperimentConfig& c, ExperimentReport& report) {
  const auto spec = c.env_spec();
  std::vector<walk::Trajectory> runs(static_cast<std::size_t>(c.walks));
  parallel_for(c.walks, c.threads, [&](long i) {
    const auto index = static_cast<std::uint64_t>(i);
    const auto local = experiments::walk_env(spec, index);
    runs[static_cast<std::size_t>(i)] = walk::run_walk(
        local, experiments::walk_clocks(spec, index), {c.max_level, c.n_steps});
  });
  double final_sum = 0.0;
  long truncated = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::ostringstream name;
    name << "walks/walk_" << std::setw(5) << std::setfill('0') << i << ".csv";
    auto out = open_output(c, name.str());
    walk::write_levels_csv(out, runs[i], c.stride);
    final_sum += runs[i].levels.back();
    truncated += runs[i].truncated ? 1 : 0;
  }
  report.results.push_back(entry("walk.run_walk", "mean_final_level",
                                 final_sum / static_cast<double>(c.walks), c.walks, "mean", true));
  report.results.push_back(entry("walk.run_walk", "truncated_walks",
                                 static_cast<double>(truncated), c.walks, "count", true));
}

void regen_command(const ExperimentConfig& c, ExperimentReport& report) {
  const auto spec = c.env_spec();
  std::vector<regen::RegenResult> results(static_cast<std::size_t>(c.walks));
  parallel_for(c.walks, c.threads, [&](long i) {
    const auto index = static_cast<std::uint64_t>(i);
    const auto local = experiments::walk_env(spec, index);
    const auto t = walk::run_walk(local, experiments::walk_clocks(spec, index),
                                  {c.max_level, c.n_steps});
    results[static_cast<std::size_t>(i)] = regen::detect_regenerations(t.levels, c.guard, t.truncated);
  });
  auto records = open_output(c, "regenerations.csv");
  regen::write_records_csv_header(records);
  auto gaps_out = open_output(c, "gaps.csv");
  gaps_out << "run_id,level_gap,time_gap\n";
  regen::GapSample all;
  all.drop_first = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    regen::write_records_csv(records, static_cast<long>(i), results[i].records);
    if (results[i].confirmed_count() < 3) continue;
    const auto g = regen::regeneration_gaps(results[i].records, true);
    for (std::size_t k = 0; k < g.size(); ++k) {
      gaps_out << i << ',' << g.level_gaps[k] << ',' << g.time_gaps[k] << '\n';
    }
    all.append(g);
  }
  const auto n = static_cast<long>(all.size());
  const auto fit = stats::fit_geometric_tail(all.level_gaps);
  report.results.push_back(entry("stats.fit_geometric_tail", "tail_a", fit.mle.a_hat, n,
                                 std::string(stats::to_string(fit.mle.method)), true));
  auto reg = entry("stats.fit_geometric_tail", "tail_a", fit.regression.a_hat, n,
                   std::string(stats::to_string(fit.regression.method)),
                   fit.regression.r_squared >= 0.98);
  report.results.push_back(reg);
  report.results.push_back(entry("stats.fit_geometric_tail", "regression_r_squared",
                                 fit.regression.r_squared, n, "least_squares",
                                 fit.regression.r_squared >= 0.98));
  report.results.push_back(entry("stats.fit_geometric_tail", "mle_minus_regression",
                                 fit.mle.a_hat - fit.regression.a_hat, n, "difference",
                                 std::abs(fit.mle.a_hat - fit.regression.a_hat) <= 0.05));
  const auto v = stats::estimate_speed(all);
  auto speed = entry("stats.estimate_speed", "speed", v.v_hat, v.n_gaps, "batch_means",
                     v.ci_low > 0.0);
  speed.ci = {v.ci_low, v.ci_high};
  report.results.push_back(speed);
}

void clt_command(const ExperimentConfig& c, ExperimentReport& report) {
  const auto spec = c.env_spec();
  const auto a = env::check_assumption_a(spec, 101, c.samples);
  if (!a.pass.value_or(false)) {
    throw PreconditionFailed("Assumption A fails for " + env::format_law(spec.law) + " with b=" +
                             std::to_string(spec.b) + ": min_t E[A^t] = " +
                             format_double(a.estimate) + " <= 1/b");
  }
  report.results.push_back(moment_entry("env.check_assumption_a", a, true));
  const auto r = experiments::run_clt(spec, c.walks, c.n_steps, c.guard, c.threads);
  auto speed = entry("stats.estimate_speed", "speed", r.speed.v_hat, r.speed.n_gaps,
                     "batch_means", r.speed.ci_low > 0.0);
  speed.ci = {r.speed.ci_low, r.speed.ci_high};
  report.results.push_back(speed);
  report.results.push_back(entry("experiments.run_clt", "finite_n_speed", r.finite_n_speed,
                                 r.estimation_walks, "mean_final_level", true));
  auto sigma = entry("stats.estimate_sigma", "sigma", r.sigma.sigma_hat, r.sigma.n,
                     std::string(stats::to_string(r.sigma.method)), r.sigma.sigma_hat > 0.0);
  sigma.ci = {r.sigma.sigma_hat - stats::kZ99 * r.sigma.std_error,
              r.sigma.sigma_hat + stats::kZ99 * r.sigma.std_error};
  report.results.push_back(sigma);
  auto ks = entry("stats.ks_normality_test", "clt_marginal", r.marginal.ks_statistic,
                  r.marginal.n, "kolmogorov_smirnov", r.marginal.p_value >= 0.01);
  ks.p_value = r.marginal.p_value;
  report.results.push_back(ks);
  for (std::size_t j = 0; j < r.fclt.increments.size(); ++j) {
    const auto& inc = r.fclt.increments[j];
    auto e = entry("stats.fclt_increment_test", "increment_" + std::to_string(j + 1),
                   inc.ks_statistic, inc.n, "kolmogorov_smirnov", inc.p_value >= r.fclt.level);
    e.p_value = inc.p_value;
    report.results.push_back(e);
  }
  double worst = 0.0;
  for (double x : r.fclt.correlations) worst = std::max(worst, std::abs(x));
  report.results.push_back(entry("stats.fclt_increment_test", "max_abs_increment_correlation",
                                 worst, r.fclt.walks, "pearson", r.fclt.correlation_passes()));
}

void moments_command(const ExperimentConfig& c, ExperimentReport& report) {
  const auto spec = c.env_spec();
  const auto a = env::check_assumption_a(spec, 101, c.samples);
  report.results.push_back(moment_entry("env.check_assumption_a", a, a.pass.value_or(false)));

  const auto mc = env::negative_moment_mc(spec, c.p, c.samples);
  if (const auto* law = std::get_if<env::LerrwLaw>(&spec.law); law && spec.b >= 2) {
    const auto cf = env::lerrw_negative_moment_cf(spec.b, law->delta, c.p);
    report.results.push_back(moment_entry("env.lerrw_negative_moment_cf", cf, true));
    report.results.push_back(
        moment_entry("env.negative_moment_mc", mc, mc.suspected_divergence() == cf.infinite));
    if (!cf.infinite) {
      const auto is = env::negative_moment_is(spec, c.p, c.samples);
      report.results.push_back(moment_entry(
          "env.negative_moment_is", is, std::abs(is.estimate - cf.estimate) <= 3.0 * is.std_error));
    }
  } else {
    report.results.push_back(moment_entry("env.negative_moment_mc", mc, !mc.suspected_divergence()));
  }

  const walk::StopRule stop{c.max_level, c.max_level > 0 ? 0 : c.n_steps};
  const auto gaps = experiments::collect_gaps(spec, c.walks, stop, c.guard, c.threads);
  std::vector<double> tau(gaps.gaps.time_gaps.begin(), gaps.gaps.time_gaps.end());
  report.results.push_back(empirical_entry("stats.empirical_moment", "tau_gap^" + format_double(c.p),
                                           stats::empirical_moment(tau, c.p)));

  auto conditioned = spec;
  conditioned.root_epsilon = c.epsilon;
  const int escape_level = std::max(c.guard + 50, c.max_level);
  const auto roots = experiments::sample_root_visits(conditioned, c.walks, escape_level, c.guard,
                                                     c.threads, static_cast<std::uint64_t>(c.walks));
  report.results.push_back(empirical_entry("stats.empirical_moment", "root_visits^3",
                                           stats::empirical_moment(roots.root_visits, 3.0)));
  report.results.push_back(empirical_entry("stats.empirical_moment", "tau_1^2.5",
                                           stats::empirical_moment(roots.first_regen_times, 2.5)));

  const auto beta = quenched::negative_moment_of_beta(spec, c.p, c.envs, 1, quenched::BetaMoment::kBeta,
                                                      c.epsilon, c.tol, c.threads);
  report.results.push_back(moment_entry("quenched.negative_moment_of_beta", beta.report,
                                        beta.report.stability->stable_under_doubling()));
  const auto gamma = quenched::negative_moment_of_beta(spec, quenched::kGammaExponent, c.envs, 1,
                                                       quenched::BetaMoment::kGammaIndicator,
                                                       c.epsilon, c.tol, c.threads);
  report.results.push_back(moment_entry("quenched.negative_moment_of_beta", gamma.report,
                                        gamma.report.stability->stable_under_doubling()));
  auto out = open_output(c, "beta.csv");
  quenched::write_beta_csv(out, beta.samples);
}

void coupling_command(const ExperimentConfig& c, ExperimentReport& report) {
  const auto spec = c.env_spec();
  const auto check = experiments::coupling_consistency(spec, c.walks, c.n_steps, c.threads);
  report.results.push_back(entry("experiments.coupling_consistency", "full_tree_mismatches",
                                 static_cast<double>(check.full_tree_mismatches), check.seeds,
                                 "exact_equality", check.full_tree_mismatches == 0));
  report.results.push_back(entry("experiments.coupling_consistency", "lambda_mismatches",
                                 static_cast<double>(check.lambda_mismatches),
                                 check.lambda_compared, "exact_equality",
                                 check.lambda_mismatches == 0));
  if (spec.b >= 2) {
    const auto a = clocks::SubtreeSpec::lambda(VertexPath::root().child(1));
    const auto b = clocks::SubtreeSpec::lambda(VertexPath::root().child(2));
    const auto ind = clocks::independence_check(spec, a, b, c.trials);
    auto e = entry("clocks.independence_check", "chi_square", ind.chi_square, ind.trials,
                   "pearson_independence", ind.p_value >= 0.01);
    e.p_value = ind.p_value;
    report.results.push_back(e);
  }
}

void appendix_command(const ExperimentConfig& c, ExperimentReport& report) {
  const auto rows = appendix_grid();
  auto out = open_output(c, "appendix.csv");
  out << "theta,p,exact,bound,holds\n" << std::setprecision(17);
  long holds = 0;
  for (const auto& r : rows) {
    const bool ok = r.exact <= r.bound;
    holds += ok ? 1 : 0;
    out << r.theta << ',' << r.p << ',' << r.exact << ',' << r.bound << ',' << (ok ? 1 : 0) << '\n';
  }
  report.results.push_back(entry("quenched.geometric_moment_bound", "grid_points_holding",
                                 static_cast<double>(holds), static_cast<long>(rows.size()),
                                 "exact_vs_bound", holds == static_cast<long>(rows.size())));
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_report(const ExperimentConfig& c, const ExperimentReport& r) {
  nlohmann::json j;
  j["command"] = to_string(r.command);
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["version"] = RWRE_VERSION;
  j["created"] = timestamp();
  j["pass"] = r.passes();
  j["results"] = nlohmann::json::array();
  for (const auto& e : r.results) j["results"].push_back(stats::to_json(e));
  auto out = open_output(c, "report.json");
  out << j.dump(2) << '\n';
}

}  // namespace

env::EnvSpec ExperimentConfig::env_spec() const { return env::EnvSpec::parse(law, b, seed); }

void ExperimentConfig::validate() const {
  env_spec();
  if (walks < 1) throw ConfigError("walks must be >= 1");
  if (n_steps < 0 || max_level < 0) throw ConfigError("n_steps and max_level must be >= 0");
  if (n_steps == 0 && max_level == 0) throw ConfigError("set n_steps or max_level");
  if (guard < 1) throw ConfigError("guard must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("p must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("tol must lie in (0, 1)");
  if (envs < 100) throw ConfigError("envs must be >= 100");
  if (samples < 100) throw ConfigError("samples must be >= 100");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (out_dir.empty()) throw ConfigError("out_dir must not be empty");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw ConfigError("out_dir is not writable: " + out_dir);
  const fs::path probe = fs::path(out_dir) / ".rwre_write_probe";
  {
    std::ofstream test(probe);
    if (!test) throw ConfigError("out_dir is not writable: " + out_dir);
  }
  fs::remove(probe, ec);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "env.law=" << law << "\nenv.b=" << b << "\nenv.seed=" << seed << "\nrun.walks=" << walks
      << "\nrun.n_steps=" << n_steps << "\nrun.max_level=" << max_level << "\nrun.guard=" << guard
      << "\nmoments.p=" << format_double(p) << "\nmoments.epsilon=" << format_double(epsilon)
      << "\nmoments.tol=" << format_double(tol) << "\nmoments.envs=" << envs
      << "\nmoments.samples=" << samples << "\ncoupling.trials=" << trials
      << "\noutput.stride=" << stride << '\n';
  return out.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0x7277'7265ULL;
  for (const unsigned char ch : canonical()) h = hash_combine(h, ch);
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << mix64(h);
  return out.str();
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig c;
  std::string section;
  std::map<std::string, int, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto where = " (line " + std::to_string(line_no) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header" + where);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected key = value" + where);
    const auto key = section + "." + std::string(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'" + where);
    if (!seen.emplace(key, line_no).second) throw ConfigError("repeated key '" + key + "'" + where);
    it->second(c, key, value);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

Command parse_command(std::string_view name) {
  for (const auto c : {Command::kSimulate, Command::kRegen, Command::kClt, Command::kMoments,
                       Command::kCoupling, Command::kAppendix}) {
    if (to_string(c) == name) return c;
  }
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::kSimulate: return "simulate";
    case Command::kRegen: return "regen";
    case Command::kClt: return "clt";
    case Command::kMoments: return "moments";
    case Command::kCoupling: return "coupling";
    case Command::kAppendix: return "appendix";
  }
  return "?";
}

bool ExperimentReport::passes() const {
  return std::all_of(results.begin(), results.end(),
                     [](const stats::ReportEntry& e) { return e.pass; });
}

std::vector<AppendixRow> appendix_grid() {
  std::vector<AppendixRow> rows;
  for (const double p : {0.5, 1.0, 2.0, 3.0}) {
    for (int i = 1; i <= 99; ++i) {
      const double theta = i / 100.0;
      const auto m = quenched::geometric_moment_bound(theta, p);
      rows.push_back({theta, p, m.exact, m.bound});
    }
  }
  return rows;
}

ExperimentReport execute(Command command, const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.command = command;
  report.config_hash = config.hash();
  report.seed = config.seed;
  switch (command) {
    case Command::kSimulate: simulate(config, report); break;
    case Command::kRegen: regen_command(config, report); break;
    case Command::kClt: clt_command(config, report); break;
    case Command::kMoments: moments_command(config, report); break;
    case Command::kCoupling: coupling_command(config, report); break;
    case Command::kAppendix: appendix_command(config, report); break;
  }
  write_report(config, report);
  return report;
}

int run(Command command, const ExperimentConfig& config, std::ostream& log) {
  try {
    const auto report = execute(command, config);
    for (const auto& e : report.results) {
      log << (e.pass ? "PASS " : "FAIL ") << e.name << ' ' << e.quantity << " = "
          << format_double(e.estimate);
      if (e.p_value) log << " (p = " << format_double(*e.p_value) << ')';
      log << '\n';
    }
    log << "report: " << (fs::path(config.out_dir) / "report.json").string() << '\n';
    return report.passes() ? kExitPass : kExitFail;
  } catch (const ConfigError& e) {
    log << "invalid config: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const PreconditionFailed& e) {
    log << "refusing to run: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    log << "failed: " << e.what() << '\n';
    return kExitFail;
  }
}

}  // namespace rwre::cli
