#include <cstdio>
#include <exception>

#include "CLI11.hpp"
#include "mlab/cli.hpp"
#include "mlab/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"marketlab: summarization, signal and evaluation pipeline"};
  app.require_subcommand(1);

  mlab::cli::Args args;
  for (const auto& name : mlab::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", args.config_path, "run configuration file")
        ->required();
    sub->add_option("--out", args.out_dir, "output directory (default: out)");
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--samples", args.samples, "override the bootstrap sample count");
    sub->add_option("--strategies", args.strategies,
                    "comma-separated strategy subset, or 'all'");
    sub->add_option("--as-of", args.as_of, "restrict to one month (YYYY-MM)");
    sub->add_option("--universe", args.universe, "alternative universe file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  args.command = app.get_subcommands().front()->get_name();

  try {
    return mlab::cli::run_command(args);
  } catch (const mlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const mlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
