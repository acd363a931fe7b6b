// Copyright 2026 The rwre Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rwre/cli.hpp"
#include "rwre/error.hpp"

int main(int argc, char** argv) {
  using namespace rwre;
  CLI::App app{"Random walks in random environment on regular trees"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
  for (const auto name : {"simulate", "regen", "clt", "moments", "coupling", "appendix"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--seed", seed, "master seed (overrides [env] seed)");
    sub->add_option("--threads", threads, "worker threads, 0 for all cores");
    sub->add_option("--out", out_dir, "output directory (overrides [output] out_dir)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitInvalid;
  }

  try {
    const auto command = cli::parse_command(app.get_subcommands().front()->get_name());
    auto config = cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    if (out_dir) config.out_dir = *out_dir;
    return cli::run(command, config, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return cli::kExitInvalid;
  }
}
