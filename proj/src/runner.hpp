#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"

namespace sqf::runner {

struct SimulateResult {
  std::vector<std::string> files;  // paths written, relative to out_dir
  nlohmann::json invariant_log;
  nlohmann::json margins;
};

// Runs the configured scenario and writes CSV outputs plus a run manifest
// into out_dir (created if missing). Trajectory i always uses the random
// stream derived from (seed, i) and statistics are reduced in trajectory
// order, so results are byte-identical regardless of the worker count.
//
// Outputs:
//   trajectories == 1 → trajectory_general.csv and/or trajectory_gaussian.csv
//   trajectories > 1  → ensemble_general.csv and/or ensemble_gaussian.csv,
//                       plus per-trajectory files when save_trajectories is on
//   backend == both   → the gaussian filter consumes the general filter's
//                       measurement record (shared-record cross-validation);
//                       the max |Δπ_t(a)| gap is reported in margins
//   manifest.json     → config echo, seed, version, timestamps, invariant log
SimulateResult simulate(const config::BuiltConfig& built,
                        const config::RawConfig& raw,
                        const std::string& out_dir);

// Sweep: re-runs `built`'s scenario once per value of a config scalar
// (dotted key, e.g. "squeezing.n"), collecting one summary row per value
// into sweep.csv: value, terminal v_cov, terminal re/im w_cov, terminal
// mean pi_n, plus the observation correlation matrix entries in the
// manifest. Only gaussian-capable scenarios are eligible.
struct SweepResult {
  std::vector<std::string> files;
  nlohmann::json rows;
};

SweepResult sweep(const config::RawConfig& raw, const std::string& parameter,
                  const std::vector<std::string>& values,
                  const std::string& out_dir);

const char* library_version();

}  // namespace sqf::runner
