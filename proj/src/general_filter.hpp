#pragma once

#include <optional>
#include <vector>

#include "common.hpp"
#include "hilbert.hpp"
#include "models.hpp"
#include "noise.hpp"
#include "sde.hpp"
#include "superop.hpp"
#include "trajectory.hpp"

namespace sqf::general_filter {

using sqf::MeasurementRecord;
using sqf::Trajectory;
using sqf::TrajectoryPoint;

struct StepResult {
  RealVector di;
  RealVector dy;
  double renorm = 0.0;
};

struct RunOptions {
  double renorm_tol = 1e-3;
  double leakage_tol = hilbert::kDefaultLeakageTol;
  // Run the full spectral validation every this many steps (0 disables it).
  Eigen::Index spectrum_every = 0;
  double eigenvalue_tol = hilbert::kEigenvalueTol;
};

// Conditional-state propagator for a general model: Euler–Maruyama on
//   d rho = D(rho) dt + sum_alpha G^alpha(rho) dI_alpha
// where D is the dual drift generator and
//   G^alpha(rho) = Lt^alpha rho + rho Lt^alpha† + [Rt^alpha - Rt^alpha†, rho]
//                  - trace((Lt^alpha + Lt^alpha†) rho) rho,
// with raised-index coefficients Lt^alpha = K^{alpha beta} Lt_beta and
// Rt^alpha = K^{alpha beta} Rt_beta. The trace is renormalized each step and
// the correction magnitude reported (it is also an integration-quality
// signal). Gains are traceless in exact arithmetic, so the correction is
// roundoff-level by construction.
class GeneralFilter {
 public:
  explicit GeneralFilter(models::BuiltScenario scenario, RunOptions opts = {});

  Eigen::Index dim() const { return scenario_.model.dim; }
  Eigen::Index n_obs() const { return scenario_.obs.n_obs(); }
  const models::BuiltScenario& scenario() const { return scenario_; }
  const noise::CorrelationMatrix& correlation() const { return corr_; }
  const RunOptions& options() const { return opts_; }

  // Predicted quadrature rates trace((Lt_alpha + Lt_alpha†) rho) at time t;
  // the innovations at this step are dI = dY - rates * dt.
  RealVector measurement_rates(const Matrix& rho, double t);

  // Advance rho by one step driven by innovation increments.
  StepResult step_with_innovations(Matrix& rho, double t, double dt,
                                   const RealVector& di, Eigen::Index step);

  // Advance rho by one step driven by observed quadrature increments.
  StepResult step_with_measurements(Matrix& rho, double t, double dt,
                                    const RealVector& dy, Eigen::Index step);

  // Gain superoperator image G^alpha(rho) (dense; exposed for tests).
  Matrix gain(const Matrix& rho, double t, Eigen::Index alpha);

  // Dual drift image D(rho) (exposed for tests and the unconditional oracle).
  Matrix drift(const Matrix& rho, double t);

 private:
  void ensure_coefficients(double t);
  StepResult step_core(Matrix& rho, double t, double dt, const RealVector& di,
                       Eigen::Index step);
  void check_state(const Matrix& rho, Eigen::Index step) const;

  models::BuiltScenario scenario_;
  RunOptions opts_;
  noise::CorrelationMatrix corr_;
  std::vector<Matrix> rtilde_comm_;  // Rt^alpha - Rt^alpha† (time-independent)

  std::size_t alpha_segment_ = SIZE_MAX;
  std::size_t beta_segment_ = SIZE_MAX;
  std::optional<superop::DriftGenerator> drift_;
  std::vector<Matrix> meas_ops_;   // Lt_alpha + Lt_alpha†
  std::vector<Matrix> ltilde_up_;  // Lt^alpha

  Matrix scratch_p_, scratch_q_, scratch_drift_, scratch_sum_;
};

// Runs a full trajectory with innovations synthesized from the stream
// (zero-mean Gaussian, covariance K dt).
Trajectory run_filter_synthesized(const models::BuiltScenario& scenario,
                                  const Matrix& rho0,
                                  const sde::IntegrationGrid& grid,
                                  sde::RngStream& rng,
                                  const RunOptions& opts = {});

// Runs a full trajectory consuming an external record's dy increments; the
// record grid must match the integration grid exactly (no resampling).
Trajectory run_filter_on_record(const models::BuiltScenario& scenario,
                                const Matrix& rho0,
                                const sde::IntegrationGrid& grid,
                                const MeasurementRecord& record,
                                const RunOptions& opts = {});

}  // namespace sqf::general_filter
