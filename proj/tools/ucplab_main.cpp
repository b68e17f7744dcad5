#include <cstdio>
#include <exception>
#include <new>
#include <string>

#include <CLI11.hpp>

#include "ucplab/errors.hpp"
#include "ucplab/experiments.hpp"

namespace {

int exit_code(ucplab::ErrorKind kind) {
  switch (kind) {
    case ucplab::ErrorKind::config: return 2;
    case ucplab::ErrorKind::solver: return 3;
    case ucplab::ErrorKind::resource: return 4;
    case ucplab::ErrorKind::io: return 5;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "ucplab: grid-based many-body Schrodinger experiments\n"
      "(ground states, densities, potential-shift recovery, weighted-inequality sweeps,\n"
      "vanishing-order scans), driven by structured-text configs"};

  std::string experiment;
  std::string config_path;
  ucplab::RunOptions opt;
  std::uint64_t seed = 0;

  app.add_option("experiment", experiment,
                 "one of: solve, density, hk-verify, carleman, opineq, ucp-scan")
      ->required();
  app.add_option("--config", config_path, "config file path")->required();
  app.add_option("--out", opt.out_dir, "output directory (overrides $UCPLAB_OUT and output.dir)");
  app.add_option("--threads", opt.threads, "sweep parallelism bound (default: hardware)");
  auto* seed_opt = app.add_option("--seed", seed, "replaces the config's seed key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version are "parse errors" with exit code 0 in CLI11.
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  opt.has_seed_override = seed_opt->count() > 0;
  opt.seed_override = seed;
  opt.expect_experiment = experiment;

  try {
    ucplab::RunManifest man = ucplab::run_experiment(config_path, opt);
    for (const std::string& f : man.outputs)
      std::printf("%s/%s\n", man.out_dir.c_str(), f.c_str());
    std::printf("%s/%s-manifest.json\n", man.out_dir.c_str(), man.experiment.c_str());
    if (!man.solver_ok) {
      std::fprintf(stderr,
                   "error: eigensolver did not converge; reports written with "
                   "converged=false\n");
      return 3;
    }
    return 0;
  } catch (const ucplab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::fprintf(stderr, "error: out of memory\n");
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
