// Copyright 2026 The cutfeec Authors
// SPDX-License-Identifier: Apache-2.0

#include "cutfeec/experiments.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
  CLI::App app{"cutfeec: unfitted Whitney-form Hodge-Laplace experiments"};
  app.require_subcommand(1);
  std::string config, out;
  for (const char *name : {"converge", "sweep-cut", "norm-equiv", "solve"})
  {
    auto *sub = app.add_subcommand(name);
    sub->add_option("--config", config, "Experiment configuration file")->required();
    sub->add_option("--out", out, "CSV output path (overrides output.output)");
  }
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : cutfeec::kExitConfig;
  }
  cutfeec::apply_thread_limit();
  return cutfeec::run_command(app.get_subcommands().front()->get_name(), config, out, std::cerr);
}
