#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"
#include "gaussian_filter.hpp"
#include "trajectory.hpp"

namespace sqf::output {

// Full-precision number formatting for CSV cells: '.' decimal separator,
// 17 significant digits (round-trippable doubles).
std::string format_double(double value);

// Trajectory CSV schema:
//   t, re_pi_a, im_pi_a, pi_n, re_pi_a2, im_pi_a2, trace_residual,
//   dI_1..dI_n, dY_1..dY_n [, v_cov, re_w_cov, im_w_cov]
// One row per `stride` steps plus the final step. Increment columns hold the
// increment accumulated since the previous emitted row (so summed columns
// telescope and a strided file is an exact coarse-grained record); the first
// row's increments are zero. trace_residual is the renormalization residual
// of the integration step ending at the emitted row.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          Eigen::Index stride);
void write_gaussian_csv(const std::string& path,
                        const gaussian_filter::GaussianTrajectory& traj,
                        Eigen::Index stride);

// Ensemble statistics over the emitted rows: per-column mean and standard
// error of the mean (sample stddev / sqrt(count), ddof = 1).
struct EnsembleAccumulator {
  explicit EnsembleAccumulator(std::vector<double> times);

  // Adds one trajectory's observable rows (5 columns per row: re_pi_a,
  // im_pi_a, pi_n, re_pi_a2, im_pi_a2). Must be called in a fixed
  // trajectory order for bit-reproducible statistics.
  void add(const RealMatrix& rows);

  Eigen::Index count() const { return count_; }
  const std::vector<double>& times() const { return times_; }
  RealMatrix mean() const;
  RealMatrix sem() const;

 private:
  std::vector<double> times_;
  Eigen::Index count_ = 0;
  RealMatrix sum_;     // Kahan-compensated running sums
  RealMatrix comp_;    // compensation terms
  RealMatrix sum_sq_;  // compensated sums of squares
  RealMatrix comp_sq_;
};

// Extracts the 5-column observable rows at the emitted-row times of a
// trajectory (same stride rule as the CSV writers).
RealMatrix observable_rows(const Trajectory& traj, Eigen::Index stride);

void write_ensemble_csv(const std::string& path,
                        const EnsembleAccumulator& acc);

// Run manifest. `config` echoes the raw key-value configuration so the run
// can be reproduced; re-running the same manifest (and library version) with
// the same seed reproduces byte-identical CSVs.
nlohmann::json raw_config_to_json(const config::RawConfig& raw);
config::RawConfig raw_config_from_json(const nlohmann::json& manifest_config,
                                       const std::string& name);

struct ManifestData {
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string version;
  std::string started_at;  // UTC, ISO-8601
  nlohmann::json invariant_log;
  nlohmann::json margins;
  std::vector<std::string> files;
};

void write_manifest(const std::string& path, const ManifestData& data);

// Current UTC timestamp, ISO-8601 with seconds.
std::string utc_timestamp();

}  // namespace sqf::output
