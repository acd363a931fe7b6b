// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment driver behind the `rwre` executable.
//
// Config files are flat `key = value` lines grouped under section headers:
//
//   [env]      law, b, seed
//   [run]      walks, n_steps, max_level, guard, threads
//   [moments]  p, epsilon, tol, envs, samples
//   [coupling] trials
//   [output]   out_dir, stride
//
// `#` and `;` start comments. Every key is optional; unknown keys, repeated
// keys and malformed values are ConfigErrors.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rwre/env.hpp"
#include "rwre/stats.hpp"

namespace rwre::cli {

struct ExperimentConfig {
  std::string law = "lerrw:1";
  int b = 4;
  std::uint64_t seed = 1;
  long walks = 1000;
  long n_steps = 5000;
  int max_level = 0;
  int guard = 100;
  int threads = 0;
  double p = 2.0;
  double epsilon = 0.3;
  double tol = 1e-4;
  long envs = 200;
  long samples = 100000;
  long trials = 10000;
  std::string out_dir = "out";
  long stride = 1;

  env::EnvSpec env_spec() const;
  // Re-checks every field; throws ConfigError.
  void validate() const;
  // One `section.key=value` line per field in a fixed order.
  std::string canonical() const;
  // 16 hex digits of a hash of canonical().
  std::string hash() const;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

enum class Command { kSimulate, kRegen, kClt, kMoments, kCoupling, kAppendix };

// Throws ConfigError for an unknown name.
Command parse_command(std::string_view name);
std::string_view to_string(Command c);

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInvalid = 2;

struct ExperimentReport {
  Command command = Command::kSimulate;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<stats::ReportEntry> results;

  bool passes() const;
};

// Runs the command, writes its CSV files and report.json into
// config.out_dir. Throws ConfigError for an unusable config, and
// PreconditionFailed when `clt` is asked to run without Assumption A.
ExperimentReport execute(Command command, const ExperimentConfig& config);

// execute() plus error handling and the exit-code convention; progress and
// errors go to `log`.
int run(Command command, const ExperimentConfig& config, std::ostream& log);

// Geometric-moment grid: theta = 0.01..0.99, p in {0.5, 1, 2, 3}.
struct AppendixRow {
  double theta = 0.0;
  double p = 0.0;
  double exact = 0.0;
  double bound = 0.0;
};
std::vector<AppendixRow> appendix_grid();

}  // namespace rwre::cli
