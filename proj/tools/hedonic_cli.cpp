#include "hedonic/commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Hedonic market condition checker"};
  app.require_subcommand(1);

  hedonic::CommandOptions opts;
  std::string out_dir = opts.out_dir.string();
  std::string format = "records";
  std::uint64_t seed = 0;
  int threads = 1;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config_path, "YAML run configuration");
    if (needs_config) c->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "report directory")->capture_default_str();
    sub->add_option("--format", format, "records (JSON Lines) or table (TSV)")
        ->check(CLI::IsMember({"records", "table"}))
        ->capture_default_str();
  };
  add_common(app.add_subcommand("check", "run the condition suite"), true);
  add_common(app.add_subcommand("mtw-scan", "compare curvature routes on random probes"), true);
  add_common(app.add_subcommand("equilibrium", "synthetic and discrete equilibrium checks"), true);
  auto* replay = app.add_subcommand("replay-witness", "recompute a stored failure witness");
  add_common(replay, false);
  replay->add_option("--witness", opts.witness_path, "witness JSON written by check")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return hedonic::kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--threads")) opts.threads = threads;
  opts.out_dir = out_dir;
  opts.format = *hedonic::parse_format(format);
  return hedonic::run_command(sub->get_name(), opts, std::cout, std::cerr);
}
