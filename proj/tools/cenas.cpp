// Command-line front end: run, compare, gen, validate.

#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cenas/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = cenas::cli;
  CLI::App app{"Carbon-aware multi-objective NAS simulator"};
  app.require_subcommand(1);

  cli::run_options run_opt;
  std::string out_dir, seeds;
  run_opt.jobs = std::max(1u, std::thread::hardware_concurrency());
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", run_opt.config, "Experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--seeds", seeds, "Comma-separated seeds (overrides the config)");
    sub->add_flag("--plot", run_opt.plot, "Also write an SVG chart per run");
    sub->add_option("--jobs", run_opt.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  };
  auto* run = app.add_subcommand("run", "Run every (strategy, seed) in a config");
  add_run_flags(run);
  auto* compare = app.add_subcommand("compare", "Run and compare strategies over the config's seeds");
  add_run_flags(compare);

  cli::gen_options gen_opt;
  auto* gen = app.add_subcommand("gen", "Write a synthetic benchmark table");
  gen->add_option("--n", gen_opt.n, "Architectures")->check(CLI::PositiveNumber);
  gen->add_option("--d", gen_opt.d, "Encoding dimension")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", gen_opt.sigma, "Proxy noise standard deviation")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", gen_opt.seed, "Generator seed");
  gen->add_option("--out", gen_opt.out, "Output CSV")->required();

  std::vector<std::string> files;
  auto* validate = app.add_subcommand("validate", "Check benchmark and trace CSVs and print statistics");
  validate->add_option("files", files, "Benchmark or trace CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::exit_input;
  }

  if (*run || *compare) {
    if (!out_dir.empty()) run_opt.out = out_dir;
    if (!seeds.empty()) {
      try {
        run_opt.seeds = cli::parse_seed_csv(seeds);
      } catch (const cenas::config_error& e) {
        std::cerr << "error: " << e.issues.front() << '\n';
        return cli::exit_input;
      }
    }
    return *run ? cli::cmd_run(run_opt, std::cout, std::cerr) : cli::cmd_compare(run_opt, std::cout, std::cerr);
  }
  if (*gen) return cli::cmd_gen(gen_opt, std::cout, std::cerr);
  std::vector<std::filesystem::path> paths(files.begin(), files.end());
  return cli::cmd_validate(paths, std::cout, std::cerr);
}
