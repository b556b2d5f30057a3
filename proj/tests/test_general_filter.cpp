#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gaussian_filter.hpp"
#include "general_filter.hpp"
#include "hilbert.hpp"
#include "models.hpp"

using namespace sqf;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

models::BuiltScenario mixed_scenario(Eigen::Index dim, double n = 0.5,
                                     double m = 0.3,
                                     Complex beta0 = Complex(0, 0)) {
  models::CavityMixedParams p;
  p.dim = dim;
  p.kappa = 1.0;
  p.omega = 0.5;
  p.phi = 0.0;
  p.squeeze = {n, {m, 0.0}};
  p.beta0 = beta0;
  return models::cavity_mixed_model(p);
}

models::BuiltScenario direct_scenario(Eigen::Index dim) {
  models::CavityDirectParams p;
  p.dim = dim;
  p.gamma = 1.0;
  p.omega = 0.3;
  p.theta = 0.5;
  p.squeeze = {0.5, {0.3, 0.0}};
  return models::cavity_direct_model(p);
}

Matrix random_density(sde::RngStream& rng, Eigen::Index dim) {
  Matrix g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      g(i, j) = Complex(rng.normal(), rng.normal());
    }
  }
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return rho;
}

}  // namespace

TEST_CASE("filter exposes the observation correlation of its scenario") {
  general_filter::GeneralFilter filter(mixed_scenario(8));
  const noise::CorrelationMatrix expected =
      noise::build_example_K({0.5, {0.3, 0.0}});
  CHECK((filter.correlation().k_mat - expected.k_mat).cwiseAbs().maxCoeff() <=
        1e-12);
  CHECK(filter.n_obs() == 2);
}

TEST_CASE("predicted rates agree with the closed-form filter on coherent "
          "states") {
  const Eigen::Index dim = 20;
  const Complex z0(0.4, -0.2);
  const Matrix rho = hilbert::pure_density(hilbert::coherent_state(z0, dim));

  // Mixed scenario, both quadratures.
  general_filter::GeneralFilter mixed(mixed_scenario(dim));
  const RealVector rates = mixed.measurement_rates(rho, 0.0);
  const auto c = gaussian_filter::MixedCoefficients::make(
      1.0, 0.5, 0.0, noise::ScalarSqueezing{0.5, {0.3, 0.0}});
  const auto [h1, h2] = gaussian_filter::measurement_rates_mixed(
      z0, c, Complex(0, 0), Complex(0, 0));
  CHECK(std::abs(rates(0) - h1) <= 1e-9);
  CHECK(std::abs(rates(1) - h2) <= 1e-9);

  // Direct scenario, single homodyne quadrature.
  general_filter::GeneralFilter direct(direct_scenario(dim));
  const RealVector drate = direct.measurement_rates(rho, 0.0);
  const auto dc = gaussian_filter::DirectCoefficients::make(
      1.0, 0.3, 0.5, noise::ScalarSqueezing{0.5, {0.3, 0.0}});
  const double hd =
      gaussian_filter::measurement_rate_direct(z0, dc, Complex(0, 0));
  CHECK(std::abs(drate(0) - hd) <= 1e-9);
}

TEST_CASE("gain superoperator images are traceless and hermiticity-preserving") {
  const Eigen::Index dim = 10;
  general_filter::GeneralFilter filter(mixed_scenario(dim));
  sde::RngStream rng = sde::derive_stream(31337, 0);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix rho = random_density(rng, dim);
    for (Eigen::Index alpha = 0; alpha < 2; ++alpha) {
      const Matrix g = filter.gain(rho, 0.0, alpha);
      CHECK(std::abs(g.trace()) <= 1e-12);
      CHECK(hermiticity_defect(g) <= 1e-12);
    }
  }
}

TEST_CASE("zero innovations reduce one step to the deterministic drift") {
  const Eigen::Index dim = 12;
  general_filter::GeneralFilter filter(mixed_scenario(dim));
  const Matrix rho0 =
      hilbert::pure_density(hilbert::coherent_state(Complex(0.3, 0.1), dim));
  const double dt = 1e-4;

  Matrix rho = rho0;
  const RealVector di = RealVector::Zero(2);
  const auto res = filter.step_with_innovations(rho, 0.0, dt, di, 0);
  const Matrix euler = rho0 + dt * filter.drift(rho0, 0.0);
  CHECK(max_abs(rho - euler) <= 1e-12);
  CHECK(std::abs(res.renorm) <= 1e-12);
  // dy = di + rates*dt even when the innovations vanish.
  const RealVector rates = filter.measurement_rates(rho0, 0.0);
  CHECK(std::abs(res.dy(0) - rates(0) * dt) <= 1e-14);
  CHECK(std::abs(res.dy(1) - rates(1) * dt) <= 1e-14);
}

TEST_CASE("measurement-driven and innovation-driven steps are consistent") {
  const Eigen::Index dim = 12;
  general_filter::GeneralFilter filter(mixed_scenario(dim));
  const Matrix rho0 =
      hilbert::pure_density(hilbert::coherent_state(Complex(0.3, 0.1), dim));
  const double dt = 1e-3;

  RealVector dy(2);
  dy << 0.02, -0.015;
  Matrix rho_meas = rho0;
  const auto res_meas = filter.step_with_measurements(rho_meas, 0.0, dt, dy, 0);

  const RealVector rates = filter.measurement_rates(rho0, 0.0);
  const RealVector di = dy - rates * dt;
  Matrix rho_innov = rho0;
  const auto res_innov =
      filter.step_with_innovations(rho_innov, 0.0, dt, di, 0);

  CHECK(max_abs(rho_meas - rho_innov) <= 1e-15);
  CHECK((res_meas.di - di).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((res_innov.dy - dy).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("synthesized records replay to the same trajectory") {
  const Eigen::Index dim = 8;
  const auto scenario = mixed_scenario(dim);
  const Matrix rho0 =
      hilbert::pure_density(hilbert::coherent_state(Complex(0.3, 0.0), dim));
  const auto grid = sde::make_grid(0.0, 0.5, 1e-3);

  sde::RngStream rng = sde::derive_stream(2025, 0);
  const Trajectory synth =
      general_filter::run_filter_synthesized(scenario, rho0, grid, rng);
  const Trajectory replay = general_filter::run_filter_on_record(
      scenario, rho0, grid, synth.record);

  REQUIRE(synth.points.size() == replay.points.size());
  double gap = 0.0;
  for (std::size_t k = 0; k < synth.points.size(); ++k) {
    gap = std::max(gap, std::abs(synth.points[k].pi_a - replay.points[k].pi_a));
  }
  CHECK(gap <= 1e-9);

  // The record satisfies dy = di + h dt step by step.
  CHECK(synth.record.n_steps() == grid.n_steps);
  CHECK(synth.record.n_obs() == 2);
}

TEST_CASE("record grids must match the integration grid") {
  const Eigen::Index dim = 6;
  const auto scenario = mixed_scenario(dim);
  const Matrix rho0 =
      hilbert::pure_density(hilbert::coherent_state(Complex(0.1, 0.0), dim));
  const auto grid = sde::make_grid(0.0, 0.1, 1e-3);

  MeasurementRecord record;
  record.times.assign(50, 0.0);
  record.dy = RealMatrix::Zero(2, 50);
  record.di = RealMatrix::Zero(2, 50);
  CHECK_THROWS_AS(general_filter::run_filter_on_record(scenario, rho0, grid,
                                                       record),
                  Error);
}

TEST_CASE("vacuum with vacuum reference is a pathwise fixed point") {
  const Eigen::Index dim = 8;
  const auto scenario = mixed_scenario(dim, 0.0, 0.0);
  Matrix rho0 = Matrix::Zero(dim, dim);
  rho0(0, 0) = 1.0;
  const auto grid = sde::make_grid(0.0, 0.5, 1e-3);
  sde::RngStream rng = sde::derive_stream(4242, 0);
  const Trajectory traj =
      general_filter::run_filter_synthesized(scenario, rho0, grid, rng);
  double max_n = 0.0;
  for (const auto& p : traj.points) max_n = std::max(max_n, std::abs(p.pi_n));
  CHECK(max_n <= 1e-12);
}

TEST_CASE("nonpositive step sizes are rejected") {
  const Eigen::Index dim = 6;
  general_filter::GeneralFilter filter(mixed_scenario(dim));
  Matrix rho = Matrix::Zero(dim, dim);
  rho(0, 0) = 1.0;
  const RealVector di = RealVector::Zero(2);
  CHECK_THROWS_AS(filter.step_with_innovations(rho, 0.0, 0.0, di, 0), Error);
  try {
    filter.step_with_innovations(rho, 0.0, -1e-3, di, 0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::step_size);
  }
}

TEST_CASE("a zero renormalization budget flags ordinary roundoff") {
  const Eigen::Index dim = 8;
  general_filter::RunOptions opts;
  opts.renorm_tol = 0.0;
  const auto scenario = mixed_scenario(dim);
  const Matrix rho0 =
      hilbert::pure_density(hilbert::coherent_state(Complex(0.3, 0.1), dim));
  const auto grid = sde::make_grid(0.0, 0.1, 1e-3);
  sde::RngStream rng = sde::derive_stream(11, 0);
  CHECK_THROWS_AS(general_filter::run_filter_synthesized(scenario, rho0, grid,
                                                         rng, opts),
                  Error);
}

TEST_CASE("per-step spectral validation can stop a leaking run") {
  const Eigen::Index dim = 6;
  // Strong coherent drive pumps population toward the truncation edge.
  const auto scenario = mixed_scenario(dim, 0.0, 0.0, Complex(1.5, 0.0));
  Matrix rho0 = Matrix::Zero(dim, dim);
  rho0(0, 0) = 1.0;
  const auto grid = sde::make_grid(0.0, 1.0, 1e-3);
  general_filter::RunOptions opts;
  opts.spectrum_every = 1;
  opts.eigenvalue_tol = 1e-3;  // generous floor: leakage is the target here
  opts.leakage_tol = 1e-12;
  sde::RngStream rng = sde::derive_stream(12, 0);
  try {
    general_filter::run_filter_synthesized(scenario, rho0, grid, rng, opts);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::leakage);
  }
}
