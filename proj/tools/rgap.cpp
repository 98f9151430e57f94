#include <CLI11.hpp>
#include <iostream>

#include "rgap/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monotone rearrangement, Polya-Szego and Dirichlet p-spectral gap experiments"};
  app.require_subcommand(1);

  rgap::RunOptions opts;
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  std::vector<std::string> overrides;

  std::vector<CLI::App*> subs;
  for (const std::string& name : rgap::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "TOML configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--override", overrides, "key=value override, dotted keys address tables");
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(rgap::ExitCode::config_error);
  }

  for (CLI::App* sub : subs)
    if (sub->parsed()) {
      opts.command = sub->get_name();
      if (sub->count("--seed") > 0) opts.seed = seed;
    }
  opts.config = config;
  opts.out_dir = out_dir;
  opts.overrides = overrides;
  return static_cast<int>(rgap::run_command(opts, std::cerr));
}
