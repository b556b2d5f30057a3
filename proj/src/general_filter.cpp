#include "general_filter.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace sqf::general_filter {

GeneralFilter::GeneralFilter(models::BuiltScenario scenario, RunOptions opts)
    : scenario_(std::move(scenario)),
      opts_(opts),
      corr_(noise::build_general_K(scenario_.obs.t_mat, scenario_.obs.u_mat,
                                   scenario_.model.squeeze)) {
  models::validate_model(scenario_.model);
  models::validate_observations(scenario_.obs, scenario_.model);

  const auto rtilde = models::build_rtilde(scenario_.model, scenario_.obs);
  const auto rtilde_up = models::raise_obs_index(corr_, rtilde);
  rtilde_comm_.reserve(rtilde_up.size());
  for (const auto& r : rtilde_up) {
    rtilde_comm_.push_back(r - r.adjoint());
  }
}

void GeneralFilter::ensure_coefficients(double t) {
  const std::size_t a_seg = scenario_.means.alpha.segment_index(t);
  const std::size_t b_seg = scenario_.means.beta.segment_index(t);
  if (drift_ && a_seg == alpha_segment_ && b_seg == beta_segment_) return;
  alpha_segment_ = a_seg;
  beta_segment_ = b_seg;

  drift_.emplace(scenario_.model, scenario_.means.alpha.value(a_seg),
                 scenario_.means.beta.value(b_seg));

  const auto ltilde =
      models::build_ltilde(scenario_.model, scenario_.means, scenario_.obs, t);
  meas_ops_.clear();
  meas_ops_.reserve(ltilde.size());
  for (const auto& l : ltilde) {
    meas_ops_.push_back(l + l.adjoint());
  }
  ltilde_up_ = models::raise_obs_index(corr_, ltilde);
}

RealVector GeneralFilter::measurement_rates(const Matrix& rho, double t) {
  ensure_coefficients(t);
  RealVector rates(n_obs());
  for (Eigen::Index a = 0; a < n_obs(); ++a) {
    rates(a) = expectation(rho, meas_ops_[a]).real();
  }
  return rates;
}

Matrix GeneralFilter::gain(const Matrix& rho, double t, Eigen::Index alpha) {
  ensure_coefficients(t);
  require(alpha >= 0 && alpha < n_obs(), ErrorCode::invalid_argument,
          "observation index out of range");
  const Matrix p = ltilde_up_[alpha] * rho;
  const Matrix q = rtilde_comm_[alpha] * rho;
  double rate_up = 0.0;
  for (Eigen::Index b = 0; b < n_obs(); ++b) {
    rate_up +=
        corr_.k_inv(alpha, b) * expectation(rho, meas_ops_[b]).real();
  }
  return p + p.adjoint() + q + q.adjoint() - rate_up * rho;
}

Matrix GeneralFilter::drift(const Matrix& rho, double t) {
  ensure_coefficients(t);
  return drift_->dual(rho);
}

StepResult GeneralFilter::step_with_innovations(Matrix& rho, double t,
                                                double dt,
                                                const RealVector& di,
                                                Eigen::Index step) {
  ensure_coefficients(t);
  return step_core(rho, t, dt, di, step);
}

StepResult GeneralFilter::step_with_measurements(Matrix& rho, double t,
                                                 double dt,
                                                 const RealVector& dy,
                                                 Eigen::Index step) {
  ensure_coefficients(t);
  require(dy.size() == n_obs(), ErrorCode::dimension,
          "measurement increment count mismatch");
  RealVector di(n_obs());
  for (Eigen::Index a = 0; a < n_obs(); ++a) {
    di(a) = dy(a) - expectation(rho, meas_ops_[a]).real() * dt;
  }
  return step_core(rho, t, dt, di, step);
}

StepResult GeneralFilter::step_core(Matrix& rho, double t, double dt,
                                    const RealVector& di, Eigen::Index step) {
  require(dt > 0.0, ErrorCode::step_size, "step size must be positive");
  require(di.size() == n_obs(), ErrorCode::dimension,
          "innovation increment count mismatch");
  const Eigen::Index d = dim();
  (void)t;

  StepResult result;
  result.di = di;
  result.dy.resize(n_obs());

  // Predicted rates (needed both for dy reconstruction and the gains).
  RealVector rates(n_obs());
  for (Eigen::Index a = 0; a < n_obs(); ++a) {
    rates(a) = expectation(rho, meas_ops_[a]).real();
    result.dy(a) = di(a) + rates(a) * dt;
  }

  // Drift.
  drift_->dual_into(rho, scratch_drift_);
  scratch_sum_ = rho + dt * scratch_drift_;

  // Gains: G^alpha(rho) = P + P† + Q + Q† - rate^alpha * rho with
  // P = Lt^alpha rho and Q = (Rt^alpha - Rt^alpha†) rho.
  for (Eigen::Index a = 0; a < n_obs(); ++a) {
    double rate_up = 0.0;
    for (Eigen::Index b = 0; b < n_obs(); ++b) {
      rate_up += corr_.k_inv(a, b) * rates(b);
    }
    scratch_p_.noalias() = ltilde_up_[a] * rho;
    scratch_sum_ += di(a) * (scratch_p_ + scratch_p_.adjoint());
    if (rtilde_comm_[a].size() > 0 &&
        rtilde_comm_[a].cwiseAbs().maxCoeff() > 0.0) {
      scratch_q_.noalias() = rtilde_comm_[a] * rho;
      scratch_sum_ += di(a) * (scratch_q_ + scratch_q_.adjoint());
    }
    scratch_sum_ -= (di(a) * rate_up) * rho;
  }

  const double trace = scratch_sum_.trace().real();
  if (!std::isfinite(trace) || !(std::abs(trace) > 0.0)) {
    std::ostringstream msg;
    msg << "state update blew up at step " << step << " (trace " << trace
        << "); reduce dt";
    fail(ErrorCode::step_size, msg.str());
  }
  result.renorm = trace - 1.0;
  if (!(std::abs(result.renorm) <= opts_.renorm_tol)) {
    std::ostringstream msg;
    msg << "trace renormalization " << result.renorm << " at step " << step
        << " exceeds " << opts_.renorm_tol << "; reduce dt";
    fail(ErrorCode::step_size, msg.str());
  }
  rho = scratch_sum_ / trace;

  check_state(rho, step);
  (void)d;
  return result;
}

void GeneralFilter::check_state(const Matrix& rho, Eigen::Index step) const {
  const double corner = rho(rho.rows() - 1, rho.cols() - 1).real();
  if (!(corner <= opts_.leakage_tol)) {
    std::ostringstream msg;
    msg << "top Fock level population " << corner << " at step " << step
        << " exceeds " << opts_.leakage_tol << "; increase the Fock dimension";
    fail(ErrorCode::leakage, msg.str());
  }
  if (opts_.spectrum_every > 0 && step % opts_.spectrum_every == 0) {
    const double lambda_min = hilbert::min_eigenvalue(rho);
    if (!(lambda_min >= -opts_.eigenvalue_tol)) {
      std::ostringstream msg;
      msg << "state eigenvalue " << lambda_min << " at step " << step
          << " below the positivity floor -" << opts_.eigenvalue_tol;
      fail(ErrorCode::physicality, msg.str());
    }
  }
}

namespace {

Trajectory run_impl(const models::BuiltScenario& scenario, const Matrix& rho0,
                    const sde::IntegrationGrid& grid, sde::RngStream* rng,
                    const MeasurementRecord* record, const RunOptions& opts) {
  GeneralFilter filter(scenario, opts);
  const Eigen::Index d = filter.dim();
  const Eigen::Index n_obs = filter.n_obs();
  require(rho0.rows() == d && rho0.cols() == d, ErrorCode::dimension,
          "initial state dimension mismatch");
  hilbert::validate_state({rho0});

  if (record != nullptr) {
    require(record->dy.rows() == n_obs, ErrorCode::dimension,
            "record observation count mismatch");
    require(record->dy.cols() == grid.n_steps, ErrorCode::invalid_argument,
            "record length does not match the integration grid (no "
            "resampling support)");
    for (Eigen::Index k = 0; k < grid.n_steps; ++k) {
      require(std::abs(record->times[static_cast<std::size_t>(k)] -
                       grid.time_at(k)) <= 1e-9 * std::max(1.0, grid.t_end),
              ErrorCode::invalid_argument,
              "record time grid does not match the integration grid");
    }
  }

  const Matrix a_op = hilbert::annihilator(d);
  const Matrix n_op = hilbert::number_operator(d);
  const Matrix a2_op = a_op * a_op;

  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.record.times.resize(static_cast<std::size_t>(grid.n_steps));
  traj.record.dy.resize(n_obs, grid.n_steps);
  traj.record.di.resize(n_obs, grid.n_steps);

  Matrix rho = rho0;
  auto sample_point = [&](double t, double renorm) {
    TrajectoryPoint p;
    p.t = t;
    p.pi_a = expectation(rho, a_op);
    p.pi_n = expectation(rho, n_op).real();
    p.pi_a2 = expectation(rho, a2_op);
    p.trace_residual = renorm;
    traj.points.push_back(p);
  };
  sample_point(grid.t0, 0.0);

  for (Eigen::Index k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time_at(k);
    StepResult res;
    if (record != nullptr) {
      res = filter.step_with_measurements(rho, t, grid.dt, record->dy.col(k),
                                          k);
    } else {
      const RealVector di =
          noise::sample_correlated_increments(filter.correlation(), grid.dt,
                                              *rng);
      res = filter.step_with_innovations(rho, t, grid.dt, di, k);
    }
    traj.record.times[static_cast<std::size_t>(k)] = t;
    traj.record.dy.col(k) = res.dy;
    traj.record.di.col(k) = res.di;
    sample_point(grid.time_at(k + 1), res.renorm);
  }
  return traj;
}

}  // namespace

Trajectory run_filter_synthesized(const models::BuiltScenario& scenario,
                                  const Matrix& rho0,
                                  const sde::IntegrationGrid& grid,
                                  sde::RngStream& rng,
                                  const RunOptions& opts) {
  return run_impl(scenario, rho0, grid, &rng, nullptr, opts);
}

Trajectory run_filter_on_record(const models::BuiltScenario& scenario,
                                const Matrix& rho0,
                                const sde::IntegrationGrid& grid,
                                const MeasurementRecord& record,
                                const RunOptions& opts) {
  return run_impl(scenario, rho0, grid, nullptr, &record, opts);
}

}  // namespace sqf::general_filter
