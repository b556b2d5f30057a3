#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hilbert.hpp"
#include "lindblad.hpp"
#include "models.hpp"
#include "noise.hpp"
#include "sde.hpp"

using namespace sqf;
using namespace sqf::lindblad;

namespace {

models::InputMeans empty_means() {
  return models::InputMeans::constants(Vector(0), Vector(0));
}

}  // namespace

TEST_CASE("vacuum damping relaxes a Fock state exponentially") {
  const double gamma = 1.3;
  const Eigen::Index dim = 6;
  models::CavityDirectParams p;
  p.dim = dim;
  p.gamma = gamma;
  const auto scenario = models::cavity_direct_model(p);

  Matrix rho0 = Matrix::Zero(dim, dim);
  rho0(1, 1) = 1.0;  // one photon
  const auto grid = sde::make_grid(0.0, 2.0, 1e-3);
  const auto traj =
      run_master_equation(scenario.model, scenario.means, rho0, grid);

  const auto curve = moment_curve(traj, Observable::photon_number);
  REQUIRE(curve.times.size() == static_cast<std::size_t>(grid.n_steps) + 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < curve.times.size(); ++k) {
    const double expected = std::exp(-gamma * curve.times[k]);
    worst = std::max(worst, std::abs(curve.values[k].real() - expected));
    CHECK(std::abs(curve.values[k].imag()) <= 1e-13);
  }
  CHECK(worst <= 1e-10);

  for (const auto& pt : traj.points) {
    CHECK(std::abs(pt.trace_residual) <= 1e-12);
  }
}

TEST_CASE("a squeezed thermal input heats the photon number and sources the "
          "squared amplitude") {
  const double gamma = 1.1;
  const double n_bar = 0.4;
  const Complex m_bar(0.2, 0.0);
  const Eigen::Index dim = 20;

  models::CavityDirectParams p;
  p.dim = dim;
  p.gamma = gamma;
  p.omega = 0.0;
  p.theta = 0.0;
  p.squeeze = {n_bar, m_bar};
  const auto scenario = models::cavity_direct_model(p);

  Matrix rho0 = Matrix::Zero(dim, dim);
  rho0(0, 0) = 1.0;
  const auto grid = sde::make_grid(0.0, 1.5, 1e-3);
  const auto traj =
      run_master_equation(scenario.model, scenario.means, rho0, grid);

  const auto number = moment_curve(traj, Observable::photon_number);
  const auto squared = moment_curve(traj, Observable::amplitude_squared);
  double worst_n = 0.0;
  double worst_a2 = 0.0;
  for (std::size_t k = 0; k < number.times.size(); ++k) {
    const double relax = 1.0 - std::exp(-gamma * number.times[k]);
    worst_n = std::max(worst_n,
                       std::abs(number.values[k].real() - n_bar * relax));
    worst_a2 =
        std::max(worst_a2, std::abs(squared.values[k] - m_bar * relax));
  }
  CHECK(worst_n <= 1e-7);
  CHECK(worst_a2 <= 1e-7);
}

TEST_CASE("a closed cavity rotates coherent amplitudes at the detuning") {
  const Eigen::Index dim = 8;
  const double omega = 0.9;
  const Complex z0(0.3, 0.0);

  models::SLHModel model;
  model.dim = dim;
  model.n_fock = 0;
  model.n_sq = 0;
  model.s_mat = Matrix::Zero(0, 0);
  model.h_op = omega * hilbert::number_operator(dim);
  model.squeeze = noise::SqueezingSpec::vacuum(0);
  models::validate_model(model);

  const Matrix rho0 = hilbert::pure_density(hilbert::coherent_state(z0, dim));
  const auto grid = sde::make_grid(0.0, 1.0, 1e-3);
  const auto traj = run_master_equation(model, empty_means(), rho0, grid);

  const auto amp = moment_curve(traj, Observable::mode_amplitude);
  double worst = 0.0;
  for (std::size_t k = 0; k < amp.times.size(); ++k) {
    const Complex expected =
        z0 * std::exp(Complex(0.0, -omega * amp.times[k]));
    worst = std::max(worst, std::abs(amp.values[k] - expected));
  }
  CHECK(worst <= 1e-9);

  // Energy is conserved without channels.
  const auto number = moment_curve(traj, Observable::photon_number);
  for (const auto& v : number.values) {
    CHECK(std::abs(v.real() - std::norm(z0)) <= 1e-10);
  }
}

TEST_CASE("record padding matches the stochastic trajectory schema") {
  const Eigen::Index dim = 4;
  models::CavityDirectParams p;
  p.dim = dim;
  p.gamma = 1.0;
  const auto scenario = models::cavity_direct_model(p);
  Matrix rho0 = Matrix::Zero(dim, dim);
  rho0(0, 0) = 1.0;
  const auto grid = sde::make_grid(0.0, 0.1, 1e-2);

  MasterEquationOptions opts;
  opts.n_obs_columns = 2;
  const auto traj =
      run_master_equation(scenario.model, scenario.means, rho0, grid, opts);
  CHECK(traj.record.n_obs() == 2);
  CHECK(traj.record.n_steps() == grid.n_steps);
  CHECK(traj.record.dy.cwiseAbs().maxCoeff() == 0.0);
  CHECK(traj.record.di.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("piecewise drives integrate segment by segment") {
  const double kappa = 1.2;
  const double omega = 0.8;
  const double phi = 0.3;
  const Eigen::Index dim = 14;

  models::CavityMixedParams p;
  p.dim = dim;
  p.kappa = kappa;
  p.omega = omega;
  p.phi = phi;
  auto scenario = models::cavity_mixed_model(p);

  const Complex beta1(0.2, 0.1);
  const Complex beta2(-0.1, 0.3);
  Vector b1(1), b2(1);
  b1(0) = beta1;
  b2(0) = beta2;
  scenario.means.beta = models::MeanSchedule::piecewise({0.0, 0.5}, {b1, b2});
  scenario.means.alpha = models::MeanSchedule::constant(Vector::Zero(1));

  const Complex z0(0.1, -0.05);
  const Matrix rho0 = hilbert::pure_density(hilbert::coherent_state(z0, dim));
  const auto grid = sde::make_grid(0.0, 1.0, 1e-3);
  const auto traj =
      run_master_equation(scenario.model, scenario.means, rho0, grid);

  // d<mu>/dt = -lambda mu - c beta with lambda = kappa/2 + i omega and
  // c = sqrt(kappa) e^{i phi}, solved exactly on each constant segment.
  const Complex lambda(0.5 * kappa, omega);
  const Complex c = std::sqrt(kappa) * std::exp(Complex(0.0, phi));
  const auto propagate = [&](Complex mu, Complex beta, double span) {
    const Complex decay = std::exp(-lambda * span);
    return decay * mu - c * beta * (1.0 - decay) / lambda;
  };

  const auto amp = moment_curve(traj, Observable::mode_amplitude);
  const Complex mu_half = propagate(z0, beta1, 0.5);

  const auto expected_at = [&](double t) {
    return t <= 0.5 ? propagate(z0, beta1, t)
                    : propagate(mu_half, beta2, t - 0.5);
  };
  double worst = 0.0;
  for (std::size_t k = 0; k < amp.times.size(); ++k) {
    worst = std::max(worst, std::abs(amp.values[k] - expected_at(amp.times[k])));
  }
  CHECK(worst <= 1e-8);
}
