#pragma once

#include <vector>

#include "common.hpp"

namespace sqf {

// Per-step increments of the observed quadratures (dy) and of the
// innovations (di), both n_obs x n_steps; times holds the step start times.
// The two are related by dy = di + (predicted rate)*dt at every step.
struct MeasurementRecord {
  std::vector<double> times;
  RealMatrix dy;
  RealMatrix di;

  Eigen::Index n_obs() const { return dy.rows(); }
  Eigen::Index n_steps() const { return dy.cols(); }
};

struct TrajectoryPoint {
  double t = 0.0;
  Complex pi_a;
  double pi_n = 0.0;
  Complex pi_a2;
  double trace_residual = 0.0;  // renormalization applied entering this point
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;  // n_steps + 1 entries
  MeasurementRecord record;
};

// Pairwise aggregation of a fine record onto a 2x coarser grid (increments
// summed over consecutive pairs); used for step-refinement studies that must
// share one Brownian path across resolutions.
inline MeasurementRecord coarsen_record(const MeasurementRecord& fine) {
  require(fine.n_steps() % 2 == 0, ErrorCode::invalid_argument,
          "record length must be even to coarsen");
  MeasurementRecord coarse;
  const Eigen::Index n = fine.n_steps() / 2;
  coarse.times.resize(static_cast<std::size_t>(n));
  coarse.dy.resize(fine.n_obs(), n);
  coarse.di.resize(fine.n_obs(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    coarse.times[static_cast<std::size_t>(k)] =
        fine.times[static_cast<std::size_t>(2 * k)];
    coarse.dy.col(k) = fine.dy.col(2 * k) + fine.dy.col(2 * k + 1);
    coarse.di.col(k) = fine.di.col(2 * k) + fine.di.col(2 * k + 1);
  }
  return coarse;
}

}  // namespace sqf
