#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "bdt/error.hpp"
#include "bdt/io.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "JSON run configuration")->required();
  cmd->add_option("--seed", opt.seed, "master seed, overrides the config");
  cmd->add_option("--out", opt.out, "output directory, overrides the config");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate and analyse beta-, beta'- and Gaussian-Delaunay tessellations"};
  app.require_subcommand(1);
  app.footer("Environment: BDT_WORKERS sets the number of worker threads.");

  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"sample", "sample the Poisson point process"},
      {"tessellate", "build the tessellation and write it as JSON"},
      {"render", "build a planar tessellation and draw it as SVG"},
      {"experiment", "run a Monte Carlo campaign"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(bdt::ErrorCode::kConfig);
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    bdt::io::RunConfig config = bdt::io::load_config(opt.config);
    const auto command = bdt::io::command_from_string(name);
    config.command = command;
    if (command == bdt::io::Command::kRender && config.model.d() != 3)
      throw bdt::ConfigError("config: model.d: render supports planar tessellations only (d = 3)");
    if (opt.seed) config.seed = *opt.seed;
    if (opt.out) config.out = *opt.out;

    const auto outcome = bdt::io::run_command(config);
    if (outcome.exit_code != 0) {
      std::fprintf(stderr, "bdt %s: %s\n", name.c_str(), outcome.message.c_str());
      return outcome.exit_code;
    }
    std::printf("%s\n", outcome.message.c_str());
    for (const auto& path : outcome.artifacts) std::printf("wrote %s\n", path.string().c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "bdt %s: %s\n", name.c_str(), e.what());
    return bdt::io::exit_code_for(e);
  }
}
