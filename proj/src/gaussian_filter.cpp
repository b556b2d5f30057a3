#include "gaussian_filter.hpp"

#include <cmath>
#include <sstream>

namespace sqf::gaussian_filter {

namespace {

constexpr double kRealMTol = 1e-12;

std::pair<double, Complex> riccati_rhs(double v, Complex w,
                                       const MixedCoefficients& c) {
  return riccati_rhs_mixed(v, w, c);
}

std::pair<double, Complex> riccati_rhs(double v, Complex w,
                                       const DirectCoefficients& c) {
  return riccati_rhs_direct(v, w, c);
}

// One classical RK4 step of the covariance pair under the scenario's
// Riccati right-hand side. Shared by integrate_covariances and the
// trajectory runners so both produce bit-identical covariance paths.
template <typename Coeffs>
void covariance_step(const Coeffs& coeffs, double dt, double& v, Complex& w) {
  struct Slope {
    double dv;
    Complex dw;
  };
  auto rhs = [&coeffs](double vv, Complex ww) -> Slope {
    const auto [dv, dw] = riccati_rhs(vv, ww, coeffs);
    return {dv, dw};
  };
  const Slope k1 = rhs(v, w);
  const Slope k2 = rhs(v + 0.5 * dt * k1.dv, w + 0.5 * dt * k1.dw);
  const Slope k3 = rhs(v + 0.5 * dt * k2.dv, w + 0.5 * dt * k2.dw);
  const Slope k4 = rhs(v + dt * k3.dv, w + dt * k3.dw);
  v += dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  w += dt / 6.0 * (k1.dw + 2.0 * k2.dw + 2.0 * k3.dw + k4.dw);
}

void validate_record_against_grid(const MeasurementRecord& record,
                                  const sde::IntegrationGrid& grid,
                                  Eigen::Index n_obs) {
  require(record.n_obs() == n_obs, ErrorCode::dimension,
          "record observation count mismatch");
  require(record.n_steps() == grid.n_steps, ErrorCode::invalid_argument,
          "record length does not match the integration grid (no resampling "
          "support)");
  for (Eigen::Index k = 0; k < grid.n_steps; ++k) {
    require(std::abs(record.times[static_cast<std::size_t>(k)] -
                     grid.time_at(k)) <= 1e-9 * std::max(1.0, grid.t_end),
            ErrorCode::invalid_argument,
            "record time grid does not match the integration grid");
  }
}

}  // namespace

void validate_covariances(double v_cov, Complex w_cov) {
  if (!(v_cov >= -kVFloorTol)) {
    std::ostringstream msg;
    msg << "conditional covariance V = " << v_cov << " is negative";
    fail(ErrorCode::physicality, msg.str());
  }
  const double slack = v_cov * (v_cov + 1.0) - std::norm(w_cov);
  if (!(slack >= -kHeisenbergTol)) {
    std::ostringstream msg;
    msg << "conditional covariances violate V(V+1) >= |W|^2 by " << -slack
        << "; reduce dt";
    fail(ErrorCode::physicality, msg.str());
  }
}

MixedCoefficients MixedCoefficients::make(
    double kappa, double omega, double phi,
    const noise::ScalarSqueezing& squeeze) {
  require(kappa > 0.0, ErrorCode::invalid_argument, "kappa must be positive");
  noise::validate_squeezing(noise::SqueezingSpec::scalar(squeeze.n, squeeze.m));
  if (std::abs(squeeze.m.imag()) > kRealMTol) {
    fail(ErrorCode::unsupported,
         "the closed-form mixed filter requires a real squeezing correlation "
         "m; run the general filter for complex m");
  }
  MixedCoefficients c;
  c.kappa = kappa;
  c.omega = omega;
  c.phi = phi;
  c.n = squeeze.n;
  c.m = squeeze.m.real();
  c.delta = (1.0 + c.n) * (1.0 + c.n) - c.m * c.m;
  require(c.delta > 0.0 && 1.0 + c.n + c.m > 0.0 && 1.0 + c.n - c.m > 0.0,
          ErrorCode::physicality,
          "squeezing parameters give a singular detector correlation");
  return c;
}

DirectCoefficients DirectCoefficients::make(
    double gamma, double omega, double theta,
    const noise::ScalarSqueezing& squeeze) {
  require(gamma > 0.0, ErrorCode::invalid_argument, "gamma must be positive");
  noise::validate_squeezing(noise::SqueezingSpec::scalar(squeeze.n, squeeze.m));
  DirectCoefficients c;
  c.gamma = gamma;
  c.omega = omega;
  c.theta = theta;
  c.n = squeeze.n;
  c.m = squeeze.m;
  c.k_corr =
      1.0 + 2.0 * c.n +
      2.0 * (std::exp(Complex(0.0, 2.0 * theta)) * c.m).real();
  require(c.k_corr > 0.0, ErrorCode::physicality,
          "squeezing parameters give a non-positive quadrature variance");
  return c;
}

std::pair<double, Complex> riccati_rhs_mixed(double v, Complex w,
                                             const MixedCoefficients& c) {
  const double dv = -c.kappa * v -
                    c.kappa * (1.0 + c.n) / c.delta * (v * v + std::norm(w)) +
                    2.0 * c.kappa * c.m / c.delta * v * w.real();
  const Complex dw = -Complex(c.kappa, 2.0 * c.omega) * w -
                     2.0 * c.kappa * (1.0 + c.n) / c.delta * w * v +
                     c.kappa * c.m / c.delta * (v * v + w * w);
  return {dv, dw};
}

std::pair<double, Complex> riccati_rhs_direct(double v, Complex w,
                                              const DirectCoefficients& c) {
  const Complex g = std::exp(Complex(0.0, -c.theta)) * (v - c.n) +
                    std::exp(Complex(0.0, c.theta)) * (w - c.m);
  const double dv = -c.gamma * (v - c.n) - c.gamma / c.k_corr * std::norm(g);
  const Complex dw = -2.0 * kI * c.omega * w - c.gamma * (w - c.m) -
                     c.gamma / c.k_corr * g * g;
  return {dv, dw};
}

template <typename Coeffs>
CovariancePath integrate_covariances(const Coeffs& coeffs, double v0,
                                     Complex w0,
                                     const sde::IntegrationGrid& grid) {
  validate_covariances(v0, w0);
  CovariancePath path;
  path.v.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  path.w.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  double v = v0;
  Complex w = w0;
  path.v.push_back(v);
  path.w.push_back(w);
  for (Eigen::Index k = 0; k < grid.n_steps; ++k) {
    covariance_step(coeffs, grid.dt, v, w);
    require(std::isfinite(v) && std::isfinite(w.real()) &&
                std::isfinite(w.imag()),
            ErrorCode::step_size, "covariance integration blew up");
    validate_covariances(v, w);
    path.v.push_back(v);
    path.w.push_back(w);
  }
  return path;
}

template CovariancePath integrate_covariances<MixedCoefficients>(
    const MixedCoefficients&, double, Complex, const sde::IntegrationGrid&);
template CovariancePath integrate_covariances<DirectCoefficients>(
    const DirectCoefficients&, double, Complex, const sde::IntegrationGrid&);

std::pair<Complex, Complex> mean_gains_mixed(double v, Complex w,
                                             const MixedCoefficients& c) {
  const double root = std::sqrt(0.5 * c.kappa);
  const Complex g1 = root * (w + v) / std::sqrt(1.0 + c.n + c.m);
  const Complex g2 = -kI * root * (w - v) / std::sqrt(1.0 + c.n - c.m);
  return {g1, g2};
}

Complex mean_gain_direct(double v, Complex w, const DirectCoefficients& c) {
  const Complex g = std::exp(Complex(0.0, -c.theta)) * (v - c.n) +
                    std::exp(Complex(0.0, c.theta)) * (w - c.m);
  return std::sqrt(c.gamma) / c.k_corr * g;
}

Complex mean_step_mixed(Complex mean, double v, Complex w,
                        const MixedCoefficients& c, Complex beta_t, double dw1,
                        double dw2, double dt) {
  const Complex drift =
      -Complex(0.5 * c.kappa, c.omega) * mean -
      std::sqrt(c.kappa) * std::exp(Complex(0.0, c.phi)) * beta_t;
  const auto [g1, g2] = mean_gains_mixed(v, w, c);
  return mean + drift * dt + g1 * dw1 + g2 * dw2;
}

Complex mean_step_direct(Complex mean, double v, Complex w,
                         const DirectCoefficients& c, Complex alpha_t,
                         double di, double dt) {
  const Complex drift = -Complex(0.5 * c.gamma, c.omega) * mean -
                        std::sqrt(c.gamma) * alpha_t;
  return mean + drift * dt + mean_gain_direct(v, w, c) * di;
}

std::pair<double, double> measurement_rates_mixed(Complex mean,
                                                  const MixedCoefficients& c,
                                                  Complex alpha_t,
                                                  Complex beta_t) {
  const double rt2 = std::sqrt(2.0);
  const Complex scattered_beta = std::exp(Complex(0.0, c.phi)) * beta_t;
  const double h1 = rt2 * (std::sqrt(c.kappa) * mean.real() +
                           (scattered_beta + alpha_t).real());
  const double h2 = rt2 * (std::sqrt(c.kappa) * mean.imag() +
                           scattered_beta.imag() - alpha_t.imag());
  return {h1, h2};
}

double measurement_rate_direct(Complex mean, const DirectCoefficients& c,
                               Complex alpha_t) {
  const Complex phase = std::exp(Complex(0.0, c.theta));
  return 2.0 * std::sqrt(c.gamma) * (phase * mean).real() +
         2.0 * (phase * alpha_t).real();
}

std::pair<double, double> innovations_mixed(Complex mean,
                                            const MixedCoefficients& c,
                                            Complex alpha_t, Complex beta_t,
                                            double dy1, double dy2,
                                            double dt) {
  const auto [h1, h2] = measurement_rates_mixed(mean, c, alpha_t, beta_t);
  return {dy1 - h1 * dt, dy2 - h2 * dt};
}

double innovations_direct(Complex mean, const DirectCoefficients& c,
                          Complex alpha_t, double dy, double dt) {
  return dy - measurement_rate_direct(mean, c, alpha_t) * dt;
}

namespace {

GaussianTrajectory run_mixed_impl(const MixedScenario& scenario,
                                  const GaussianFilterState& init,
                                  const sde::IntegrationGrid& grid,
                                  sde::RngStream* rng,
                                  const MeasurementRecord* record) {
  const auto& c = scenario.coeffs;
  if (record != nullptr) validate_record_against_grid(*record, grid, 2);
  validate_covariances(init.v_cov, init.w_cov);
  require(scenario.means.alpha.at(grid.t0).size() == 1 &&
              scenario.means.beta.at(grid.t0).size() == 1,
          ErrorCode::dimension,
          "mixed scenario needs one squeezed-channel and one Fock-channel "
          "input mean");

  GaussianTrajectory traj;
  traj.base.points.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.v.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.w.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.base.record.times.resize(static_cast<std::size_t>(grid.n_steps));
  traj.base.record.dy.resize(2, grid.n_steps);
  traj.base.record.di.resize(2, grid.n_steps);

  Complex mean = init.mean;
  double v = init.v_cov;
  Complex w = init.w_cov;
  auto sample = [&](double t) {
    TrajectoryPoint p;
    p.t = t;
    p.pi_a = mean;
    p.pi_n = v + std::norm(mean);
    p.pi_a2 = w + mean * mean;
    p.trace_residual = 0.0;
    traj.base.points.push_back(p);
    traj.v.push_back(v);
    traj.w.push_back(w);
  };
  sample(grid.t0);

  const double sq_plus = std::sqrt(1.0 + c.n + c.m);
  const double sq_minus = std::sqrt(1.0 + c.n - c.m);
  const double sqrt_dt = std::sqrt(grid.dt);
  for (Eigen::Index k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time_at(k);
    const Complex alpha_t = scenario.means.alpha.at(t)(0);
    const Complex beta_t = scenario.means.beta.at(t)(0);
    const auto [h1, h2] = measurement_rates_mixed(mean, c, alpha_t, beta_t);
    double di1, di2, dw1, dw2;
    if (record != nullptr) {
      di1 = record->dy(0, k) - h1 * grid.dt;
      di2 = record->dy(1, k) - h2 * grid.dt;
      dw1 = di1 / sq_plus;
      dw2 = di2 / sq_minus;
    } else {
      dw1 = rng->normal() * sqrt_dt;
      dw2 = rng->normal() * sqrt_dt;
      di1 = sq_plus * dw1;
      di2 = sq_minus * dw2;
    }
    traj.base.record.times[static_cast<std::size_t>(k)] = t;
    traj.base.record.di(0, k) = di1;
    traj.base.record.di(1, k) = di2;
    traj.base.record.dy(0, k) = di1 + h1 * grid.dt;
    traj.base.record.dy(1, k) = di2 + h2 * grid.dt;

    mean = mean_step_mixed(mean, v, w, c, beta_t, dw1, dw2, grid.dt);
    covariance_step(c, grid.dt, v, w);
    require(std::isfinite(mean.real()) && std::isfinite(mean.imag()),
            ErrorCode::step_size, "mean update blew up; reduce dt");
    validate_covariances(v, w);
    sample(grid.time_at(k + 1));
  }
  return traj;
}

GaussianTrajectory run_direct_impl(const DirectScenario& scenario,
                                   const GaussianFilterState& init,
                                   const sde::IntegrationGrid& grid,
                                   sde::RngStream* rng,
                                   const MeasurementRecord* record) {
  const auto& c = scenario.coeffs;
  if (record != nullptr) validate_record_against_grid(*record, grid, 1);
  validate_covariances(init.v_cov, init.w_cov);
  require(scenario.means.alpha.at(grid.t0).size() == 1, ErrorCode::dimension,
          "direct scenario needs one squeezed-channel input mean");

  GaussianTrajectory traj;
  traj.base.points.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.v.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.w.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.base.record.times.resize(static_cast<std::size_t>(grid.n_steps));
  traj.base.record.dy.resize(1, grid.n_steps);
  traj.base.record.di.resize(1, grid.n_steps);

  Complex mean = init.mean;
  double v = init.v_cov;
  Complex w = init.w_cov;
  auto sample = [&](double t) {
    TrajectoryPoint p;
    p.t = t;
    p.pi_a = mean;
    p.pi_n = v + std::norm(mean);
    p.pi_a2 = w + mean * mean;
    p.trace_residual = 0.0;
    traj.base.points.push_back(p);
    traj.v.push_back(v);
    traj.w.push_back(w);
  };
  sample(grid.t0);

  const double sqrt_k_dt = std::sqrt(c.k_corr * grid.dt);
  for (Eigen::Index k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time_at(k);
    const Complex alpha_t = scenario.means.alpha.at(t)(0);
    const double h = measurement_rate_direct(mean, c, alpha_t);
    double di;
    if (record != nullptr) {
      di = record->dy(0, k) - h * grid.dt;
    } else {
      di = rng->normal() * sqrt_k_dt;
    }
    traj.base.record.times[static_cast<std::size_t>(k)] = t;
    traj.base.record.di(0, k) = di;
    traj.base.record.dy(0, k) = di + h * grid.dt;

    mean = mean_step_direct(mean, v, w, c, alpha_t, di, grid.dt);
    covariance_step(c, grid.dt, v, w);
    require(std::isfinite(mean.real()) && std::isfinite(mean.imag()),
            ErrorCode::step_size, "mean update blew up; reduce dt");
    validate_covariances(v, w);
    sample(grid.time_at(k + 1));
  }
  return traj;
}

}  // namespace

GaussianTrajectory run_mixed_synthesized(const MixedScenario& scenario,
                                         const GaussianFilterState& init,
                                         const sde::IntegrationGrid& grid,
                                         sde::RngStream& rng) {
  return run_mixed_impl(scenario, init, grid, &rng, nullptr);
}

GaussianTrajectory run_mixed_on_record(const MixedScenario& scenario,
                                       const GaussianFilterState& init,
                                       const sde::IntegrationGrid& grid,
                                       const MeasurementRecord& record) {
  return run_mixed_impl(scenario, init, grid, nullptr, &record);
}

GaussianTrajectory run_direct_synthesized(const DirectScenario& scenario,
                                          const GaussianFilterState& init,
                                          const sde::IntegrationGrid& grid,
                                          sde::RngStream& rng) {
  return run_direct_impl(scenario, init, grid, &rng, nullptr);
}

GaussianTrajectory run_direct_on_record(const DirectScenario& scenario,
                                        const GaussianFilterState& init,
                                        const sde::IntegrationGrid& grid,
                                        const MeasurementRecord& record) {
  return run_direct_impl(scenario, init, grid, nullptr, &record);
}

}  // namespace sqf::gaussian_filter
