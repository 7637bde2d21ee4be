// Batch front door: run / check / oracle over JSON configs. Links only the
// shared C API.
#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "kvh_lab.h"

namespace {

struct CommonArgs {
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool has_seed = false;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out_dir) {
  cmd->add_option("--config", args.config, "JSON configuration file")->required();
  if (with_out_dir) cmd->add_option("--out-dir", args.out_dir, "output directory (overrides the config)");
  cmd->add_option("--seed", args.seed, "Sobol scramble seed (overrides the config)")
      ->each([&args](const std::string&) { args.has_seed = true; });
  cmd->add_option("--threads", args.threads,
                  "worker threads (0 = auto; falls back to KVH_LAB_THREADS, results never depend on it)");
}

kvh_options to_options(const CommonArgs& args) {
  kvh_options opts;
  opts.seed = args.seed;
  opts.has_seed = args.has_seed ? 1 : 0;
  opts.threads = args.threads;
  return opts;
}

int report(int rc) {
  const char* err = kvh_last_error();
  if (rc != 0) {
    std::fprintf(stderr, "error (%d): %s\n", rc, err && err[0] ? err : "unknown failure");
  } else if (err && err[0]) {
    std::fprintf(stderr, "%s\n", err);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-space wavefunction laboratory"};
  app.require_subcommand(1);

  CommonArgs run_args, check_args, oracle_args;
  std::string points_path, oracle_out;

  CLI::App* run = app.add_subcommand("run", "propagate the configured scenario and write series/summary files");
  add_common(run, run_args, true);

  CLI::App* check = app.add_subcommand("check", "run the configured (or default) named checks");
  add_common(check, check_args, true);

  CLI::App* oracle =
      app.add_subcommand("oracle", "evaluate the characteristics solution at points from a CSV file");
  add_common(oracle, oracle_args, false);
  oracle->add_option("--points", points_path, "CSV of evaluation points (columns z1..z2n)")->required();
  oracle->add_option("--out", oracle_out, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    const kvh_options opts = to_options(run_args);
    return report(kvh_run(run_args.config.c_str(), run_args.out_dir.empty() ? nullptr : run_args.out_dir.c_str(),
                          &opts));
  }
  if (check->parsed()) {
    const kvh_options opts = to_options(check_args);
    return report(kvh_check(check_args.config.c_str(),
                            check_args.out_dir.empty() ? nullptr : check_args.out_dir.c_str(), &opts));
  }
  const kvh_options opts = to_options(oracle_args);
  return report(kvh_oracle(oracle_args.config.c_str(), points_path.c_str(), oracle_out.c_str(), &opts));
}
