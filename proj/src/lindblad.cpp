#include "lindblad.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "superop.hpp"

namespace sqf::lindblad {

MomentCurve moment_curve(const Trajectory& trajectory,
                         Observable observable) {
  MomentCurve curve;
  curve.times.reserve(trajectory.points.size());
  curve.values.reserve(trajectory.points.size());
  for (const auto& p : trajectory.points) {
    curve.times.push_back(p.t);
    switch (observable) {
      case Observable::mode_amplitude:
        curve.values.push_back(p.pi_a);
        break;
      case Observable::photon_number:
        curve.values.push_back(Complex(p.pi_n, 0.0));
        break;
      case Observable::amplitude_squared:
        curve.values.push_back(p.pi_a2);
        break;
    }
  }
  return curve;
}

Trajectory run_master_equation(const models::SLHModel& model,
                               const models::InputMeans& means,
                               const Matrix& rho0,
                               const sde::IntegrationGrid& grid,
                               const MasterEquationOptions& options) {
  models::validate_model(model);
  require(rho0.rows() == model.dim && rho0.cols() == model.dim,
          ErrorCode::dimension, "initial state dimension mismatch");
  hilbert::validate_state(hilbert::ConditionalState{rho0});
  require(options.n_obs_columns >= 0, ErrorCode::invalid_argument,
          "n_obs_columns must be non-negative");

  const Matrix a_op = hilbert::annihilator(model.dim);
  const Matrix n_op = hilbert::number_operator(model.dim);
  const Matrix a2_op = a_op * a_op;

  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.record.times.resize(static_cast<std::size_t>(grid.n_steps));
  traj.record.dy = RealMatrix::Zero(options.n_obs_columns, grid.n_steps);
  traj.record.di = RealMatrix::Zero(options.n_obs_columns, grid.n_steps);

  Matrix rho = rho0;
  auto sample = [&](double t) {
    TrajectoryPoint p;
    p.t = t;
    p.pi_a = expectation(rho, a_op);
    p.pi_n = expectation(rho, n_op).real();
    p.pi_a2 = expectation(rho, a2_op);
    p.trace_residual = rho.trace().real() - 1.0;
    traj.points.push_back(p);
  };
  sample(grid.t0);

  std::optional<superop::DriftGenerator> drift;
  std::size_t seg_alpha = 0;
  std::size_t seg_beta = 0;
  for (Eigen::Index k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time_at(k);
    const std::size_t sa = means.alpha.segment_index(t);
    const std::size_t sb = means.beta.segment_index(t);
    if (!drift.has_value() || sa != seg_alpha || sb != seg_beta) {
      drift.emplace(model, means.alpha.value(sa), means.beta.value(sb));
      seg_alpha = sa;
      seg_beta = sb;
    }

    const Matrix k1 = drift->dual(rho);
    const Matrix k2 = drift->dual(rho + (0.5 * grid.dt) * k1);
    const Matrix k3 = drift->dual(rho + (0.5 * grid.dt) * k2);
    const Matrix k4 = drift->dual(rho + grid.dt * k3);
    rho += (grid.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t_next = grid.time_at(k + 1);
    const double trace_err = std::abs(rho.trace().real() - 1.0);
    if (!std::isfinite(trace_err) ||
        trace_err > options.trace_tol * std::max(1.0, t_next - grid.t0)) {
      std::ostringstream msg;
      msg << "unconditional evolution lost trace by " << trace_err
          << " at step " << k
          << " without renormalization: generator assembly error";
      fail(ErrorCode::internal, msg.str());
    }
    const double corner = rho(model.dim - 1, model.dim - 1).real();
    if (corner > options.leakage_tol) {
      std::ostringstream msg;
      msg << "truncation leakage " << corner << " exceeds tolerance "
          << options.leakage_tol << " at step " << k
          << "; increase the Fock dimension";
      fail(ErrorCode::leakage, msg.str());
    }

    traj.record.times[static_cast<std::size_t>(k)] = t;
    sample(t_next);
  }
  return traj;
}

}  // namespace sqf::lindblad
