#pragma once

#include <vector>

#include "hilbert.hpp"
#include "models.hpp"
#include "sde.hpp"
#include "trajectory.hpp"

namespace sqf::lindblad {

// Unconditional (ensemble-average) evolution: the conditional dynamics with
// the innovation gains averaged out, leaving the deterministic generator
// alone. Integrated with classical RK4 and *no* renormalization — the trace
// residual is a direct probe of generator assembly, so a drift beyond
// kTraceDriftTol per unit time is reported as an internal error rather than
// silently corrected.
inline constexpr double kTraceDriftTol = 1e-9;

// Selects which expectation series to pull out of a trajectory.
enum class Observable { mode_amplitude, photon_number, amplitude_squared };

struct MomentCurve {
  std::vector<double> times;
  std::vector<Complex> values;
};

MomentCurve moment_curve(const Trajectory& trajectory, Observable observable);

struct MasterEquationOptions {
  // Number of observation columns for the (zero-filled) record, so outputs
  // share the trajectory schema of the stochastic filters.
  Eigen::Index n_obs_columns = 0;
  double trace_tol = kTraceDriftTol;
  double leakage_tol = hilbert::kDefaultLeakageTol;
};

// RK4 integration of drho/dt = D(rho) on the grid. Input means may be
// piecewise constant; the generator is rebuilt at schedule-segment changes
// and held fixed across each step. The returned trajectory carries the
// same expectation columns as the stochastic filters with zeroed
// measurement increments; trace_residual logs trace(rho) - 1 without
// renormalizing.
Trajectory run_master_equation(const models::SLHModel& model,
                               const models::InputMeans& means,
                               const Matrix& rho0,
                               const sde::IntegrationGrid& grid,
                               const MasterEquationOptions& options = {});

}  // namespace sqf::lindblad
