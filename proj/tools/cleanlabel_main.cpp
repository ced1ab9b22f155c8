// Command-line front end: `run` executes a JSON experiment config, `audit`
// runs the property batteries, `table` summarizes result CSVs.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "cleanlabel/runner.hpp"

namespace {

std::size_t default_workers() {
  if (const char* env = std::getenv("CLEANLABEL_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

std::vector<std::string> split_columns(const std::string& spec) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : spec) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"clean-label poisoning simulations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t workers = default_workers();
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", config_path, "JSON experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->required();
  CLI::Option* seed_opt =
      run->add_option("--seed", seed, "override the config seed");
  run->add_option("--workers", workers,
                  "worker threads (default: CLEANLABEL_WORKERS or 1)");

  std::string scope = "all";
  CLI::App* audit = app.add_subcommand("audit", "run property audits");
  audit->add_option("--scope", scope, "all|attackers|geometry|symmetry");

  std::vector<std::string> files;
  std::string group_by = "learner,attacker";
  CLI::App* table = app.add_subcommand("table", "summarize results CSVs");
  table->add_option("files", files, "results.csv files")
      ->required()
      ->check(CLI::ExistingFile);
  table->add_option("--group-by", group_by, "comma-separated result columns");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    cleanlabel::RunOptions options;
    options.config_path = config_path;
    options.out_dir = out_dir;
    if (seed_opt->count() > 0) options.seed = seed;
    options.workers = workers;
    return cleanlabel::run_config(options, std::cout);
  }
  if (audit->parsed()) {
    return cleanlabel::run_audits(scope, std::cout);
  }
  return cleanlabel::make_table(files, split_columns(group_by), std::cout);
}
