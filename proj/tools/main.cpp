#include <CLI11.hpp>

#include "cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Musielak-Orlicz toolkit and parabolic solver"};
  app.require_subcommand(1);
  orlicz::cli::Flags flags;
  std::uint64_t seed = 0;
  std::string out;
  for (const auto& name : orlicz::cli::commands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    sub->add_option("--config", flags.config, "experiment config (YAML)")->required();
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--jobs", flags.jobs, "concurrent sub-experiments")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) flags.seed = seed;
  if (sub->count("--out")) flags.out = out;
  return orlicz::cli::run(sub->get_name(), flags);
}
