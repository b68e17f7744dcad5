#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ucplab {

/// One timed pipeline stage, for the run manifest.
struct StageTime {
  std::string name;
  double seconds = 0.0;
};

/// What a run left behind.  `outputs` lists every artifact written into
/// `out_dir` except the manifest itself.  Timings are informational and are
/// the only fields excluded from the byte-reproducibility contract; every
/// report file is bit-identical when the same config runs twice.
struct RunManifest {
  std::string experiment;
  std::string config_hash;  ///< FNV-1a over the resolved config, key-sorted
  std::string artifact_version = "ucplab/1";
  bool solver_ok = true;  ///< false when an eigensolve did not converge
  std::string out_dir;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
  std::vector<StageTime> stages;
};

/// Command-line overrides threaded into a run.  The seed override replaces
/// the config's seed key for experiments that have a random stage and is a
/// config error for those that do not.
struct RunOptions {
  std::string out_dir;  ///< empty = resolve from $UCPLAB_OUT, then output.dir
  int threads = 0;      ///< 0 = hardware default; bounds sweep parallelism
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  /// When non-empty, the config's experiment key must match this (the CLI
  /// passes its positional argument) or the run aborts before computing.
  std::string expect_experiment;
};

/// Parses the config, validates every key before computing, runs the named
/// experiment pipeline, and writes <experiment>-report.json (always), the
/// optional CSV / gnuplot / wavefunction artifacts, and the manifest.
///
/// A non-converged solve still writes its reports (flagged converged=false)
/// and returns solver_ok=false; hard errors propagate as ucplab::Error.
RunManifest run_experiment(const std::string& config_path, const RunOptions& opt = {});

/// Same pipeline on in-memory config text (for tests).
RunManifest run_experiment_text(const std::string& config_text, const RunOptions& opt = {});

}  // namespace ucplab
