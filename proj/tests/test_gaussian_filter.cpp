#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <utility>

#include "gaussian_filter.hpp"
#include "models.hpp"
#include "sde.hpp"

using namespace sqf;
using namespace sqf::gaussian_filter;

namespace {
constexpr double kPi = 3.14159265358979323846;

models::InputMeans scalar_means(Complex alpha0, Complex beta0) {
  Vector a(1), b(1);
  a(0) = alpha0;
  b(0) = beta0;
  return models::InputMeans::constants(a, b);
}
}  // namespace

TEST_CASE("mixed coefficients: construction and guards") {
  const auto c = MixedCoefficients::make(1.0, 0.5, 0.2, {0.5, {0.3, 0.0}});
  CHECK(c.n == doctest::Approx(0.5));
  CHECK(c.m == doctest::Approx(0.3));
  CHECK(c.delta == doctest::Approx(2.25 - 0.09));

  CHECK_THROWS_AS(MixedCoefficients::make(0.0, 0.0, 0.0, {0.0, {0.0, 0.0}}),
                  Error);
  CHECK_THROWS_AS(MixedCoefficients::make(-1.0, 0.0, 0.0, {0.0, {0.0, 0.0}}),
                  Error);
  // A complex correlation is physically fine but outside this closed form.
  try {
    MixedCoefficients::make(1.0, 0.0, 0.0, {0.5, {0.3, 0.1}});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported);
  }
  // Unphysical squeezing is rejected before coefficient assembly.
  CHECK_THROWS_AS(MixedCoefficients::make(1.0, 0.0, 0.0, {0.1, {0.5, 0.0}}),
                  Error);
}

TEST_CASE("direct coefficients: quadrature variance rate") {
  // theta = 0: K = 1 + 2n + 2 m'.
  const auto c0 = DirectCoefficients::make(1.0, 0.0, 0.0, {0.5, {0.3, 0.2}});
  CHECK(c0.k_corr == doctest::Approx(2.6).epsilon(1e-12));

  // theta = pi/4: only the imaginary part of m survives, with a sign set by
  // the e^{+i theta} observation phase.
  const auto c1 =
      DirectCoefficients::make(1.0, 0.0, kPi / 4.0, {0.5, {0.3, 0.2}});
  CHECK(c1.k_corr == doctest::Approx(1.6).epsilon(1e-12));

  // General angle against the defining formula.
  const double theta = kPi / 6.0;
  const auto c2 = DirectCoefficients::make(1.0, 0.0, theta, {0.5, {0.3, 0.2}});
  const double expected =
      2.0 + 2.0 * (0.3 * std::cos(2 * theta) - 0.2 * std::sin(2 * theta));
  CHECK(c2.k_corr == doctest::Approx(expected).epsilon(1e-14));

  CHECK_THROWS_AS(DirectCoefficients::make(0.0, 0.0, 0.0, {0.0, {0.0, 0.0}}),
                  Error);
}

TEST_CASE("covariance equations: pinned right-hand sides") {
  // Vacuum reference, arbitrary state.
  {
    const auto c = MixedCoefficients::make(2.0, 0.5, 0.0, {0.0, {0.0, 0.0}});
    const auto [dv, dw] = riccati_rhs_mixed(0.5, Complex(0.0, 0.25), c);
    CHECK(dv == doctest::Approx(-1.625).epsilon(1e-14));
    CHECK(dw.real() == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(dw.imag() == doctest::Approx(-1.0).epsilon(1e-14));
  }
  // Maximal real correlation, all couplings active.
  {
    const auto c = MixedCoefficients::make(1.0, 0.0, 0.0, {1.0, {1.0, 0.0}});
    const auto [dv, dw] = riccati_rhs_mixed(1.0, Complex(1.0, 0.0), c);
    CHECK(dv == doctest::Approx(-5.0 / 3.0).epsilon(1e-14));
    CHECK(dw.real() == doctest::Approx(-5.0 / 3.0).epsilon(1e-14));
    CHECK(dw.imag() == doctest::Approx(0.0).epsilon(1e-14));
  }
  // Direct detection of a thermal field.
  {
    const auto c = DirectCoefficients::make(1.0, 0.0, 0.0, {1.0, {0.0, 0.0}});
    const auto [dv, dw] = riccati_rhs_direct(2.0, Complex(0.0, 0.0), c);
    CHECK(dv == doctest::Approx(-4.0 / 3.0).epsilon(1e-14));
    CHECK(dw.real() == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(dw.imag() == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("covariance equations: fixed points") {
  // (0, 0) is stationary for the mixed form at any squeezing.
  const auto cm = MixedCoefficients::make(1.3, 0.7, 0.2, {0.5, {0.3, 0.0}});
  const auto [dv0, dw0] = riccati_rhs_mixed(0.0, Complex(0.0, 0.0), cm);
  CHECK(std::abs(dv0) <= 1e-15);
  CHECK(std::abs(dw0) <= 1e-15);

  // (n, m) is stationary for direct detection on resonance.
  const auto cd =
      DirectCoefficients::make(1.7, 0.0, 0.4, {0.5, {0.3, 0.1}});
  const auto [dvn, dwn] = riccati_rhs_direct(cd.n, cd.m, cd);
  CHECK(std::abs(dvn) <= 1e-15);
  CHECK(std::abs(dwn) <= 1e-15);
}

TEST_CASE("covariance integration follows the vacuum logistic closed form") {
  const auto c = MixedCoefficients::make(1.0, 0.0, 0.0, {0.0, {0.0, 0.0}});
  const auto grid = sde::make_grid(0.0, 1.0, 1e-3);
  const auto path = integrate_covariances(c, 1.0, Complex(0.0, 0.0), grid);
  REQUIRE(path.v.size() == static_cast<std::size_t>(grid.n_steps) + 1);
  REQUIRE(path.w.size() == path.v.size());
  for (Eigen::Index k = 0; k <= grid.n_steps; ++k) {
    const double t = grid.time_at(k);
    const double expected = std::exp(-t) / (2.0 - std::exp(-t));
    CHECK(std::abs(path.v[static_cast<std::size_t>(k)] - expected) <= 1e-8);
    CHECK(std::abs(path.w[static_cast<std::size_t>(k)]) <= 1e-12);
  }
}

TEST_CASE("covariance validation enforces positivity and the uncertainty "
          "bound") {
  CHECK_NOTHROW(validate_covariances(0.0, Complex(0.0, 0.0)));
  CHECK_NOTHROW(validate_covariances(1.0, Complex(std::sqrt(2.0), 0.0)));
  CHECK_THROWS_AS(validate_covariances(-1.0, Complex(0.0, 0.0)), Error);
  CHECK_THROWS_AS(validate_covariances(1.0, Complex(1.5, 0.0)), Error);
  CHECK_THROWS_AS(validate_covariances(0.0, Complex(1.0, 0.0)), Error);

  const auto c = MixedCoefficients::make(1.0, 0.0, 0.0, {0.0, {0.0, 0.0}});
  const auto grid = sde::make_grid(0.0, 0.1, 1e-3);
  CHECK_THROWS_AS(integrate_covariances(c, -1.0, Complex(0.0, 0.0), grid),
                  Error);
  CHECK_THROWS_AS(integrate_covariances(c, 0.0, Complex(1.0, 0.0), grid),
                  Error);
}

TEST_CASE("mean steps decompose into the advertised drift and gains") {
  const Complex mean(0.4, -0.2);
  const double v = 0.3;
  const Complex w(0.1, 0.05);
  const double dt = 1e-3;

  SUBCASE("mixed") {
    const auto c = MixedCoefficients::make(1.7, 0.6, 0.4, {0.5, {0.3, 0.0}});
    const Complex beta(0.2, 0.1);
    const Complex base = mean_step_mixed(mean, v, w, c, beta, 0.0, 0.0, dt);
    const Complex drift = (base - mean) / dt;
    const Complex expected_drift =
        -Complex(0.5 * c.kappa, c.omega) * mean -
        std::sqrt(c.kappa) * std::exp(Complex(0.0, c.phi)) * beta;
    CHECK(std::abs(drift - expected_drift) <= 1e-10);

    const auto [g1, g2] = mean_gains_mixed(v, w, c);
    const Complex with_w1 = mean_step_mixed(mean, v, w, c, beta, 1.0, 0.0, dt);
    const Complex with_w2 = mean_step_mixed(mean, v, w, c, beta, 0.0, 1.0, dt);
    CHECK(std::abs((with_w1 - base) - g1) <= 1e-15);
    CHECK(std::abs((with_w2 - base) - g2) <= 1e-15);
  }

  SUBCASE("direct") {
    const auto c = DirectCoefficients::make(1.3, 0.6, 0.5, {0.5, {0.3, 0.1}});
    const Complex alpha(0.05, -0.1);
    const Complex base = mean_step_direct(mean, v, w, c, alpha, 0.0, dt);
    const Complex drift = (base - mean) / dt;
    const Complex expected_drift =
        -Complex(0.5 * c.gamma, c.omega) * mean - std::sqrt(c.gamma) * alpha;
    CHECK(std::abs(drift - expected_drift) <= 1e-10);

    const Complex g = mean_gain_direct(v, w, c);
    const Complex with_di = mean_step_direct(mean, v, w, c, alpha, 1.0, dt);
    CHECK(std::abs((with_di - base) - g) <= 1e-15);
  }
}

TEST_CASE("innovation gains vanish on the coherent-state manifold under a "
          "vacuum field") {
  const auto cm = MixedCoefficients::make(1.0, 0.3, 0.0, {0.0, {0.0, 0.0}});
  const auto [g1, g2] = mean_gains_mixed(0.0, Complex(0.0, 0.0), cm);
  CHECK(std::abs(g1) <= 1e-15);
  CHECK(std::abs(g2) <= 1e-15);

  const auto cd = DirectCoefficients::make(1.0, 0.3, 0.7, {0.0, {0.0, 0.0}});
  CHECK(std::abs(mean_gain_direct(0.0, Complex(0.0, 0.0), cd)) <= 1e-15);
}

TEST_CASE("predicted rates and innovations") {
  SUBCASE("mixed without drives: quadrature means of the cavity output") {
    const auto c = MixedCoefficients::make(1.7, 0.6, 0.0, {0.5, {0.3, 0.0}});
    const Complex mean(0.4, -0.2);
    const auto [h1, h2] =
        measurement_rates_mixed(mean, c, Complex(0, 0), Complex(0, 0));
    CHECK(h1 == doctest::Approx(std::sqrt(2.0 * 1.7) * 0.4).epsilon(1e-14));
    CHECK(h2 == doctest::Approx(std::sqrt(2.0 * 1.7) * -0.2).epsilon(1e-14));

    const auto [i1, i2] = innovations_mixed(mean, c, Complex(0, 0),
                                            Complex(0, 0), 0.02, -0.01, 1e-3);
    CHECK(i1 == doctest::Approx(0.02 - h1 * 1e-3).epsilon(1e-14));
    CHECK(i2 == doctest::Approx(-0.01 - h2 * 1e-3).epsilon(1e-14));
  }

  SUBCASE("direct with a driven squeezed input") {
    const double theta = 0.5;
    const auto c = DirectCoefficients::make(1.0, 0.3, theta, {0.5, {0.3, 0.1}});
    const Complex mean(0.4, -0.2);
    const Complex alpha(0.1, 0.3);
    const double h = measurement_rate_direct(mean, c, alpha);
    const Complex phase = std::exp(Complex(0.0, theta));
    const double expected =
        2.0 * (phase * mean).real() + 2.0 * (phase * alpha).real();
    CHECK(h == doctest::Approx(expected).epsilon(1e-14));

    const double di = innovations_direct(mean, c, alpha, 0.015, 1e-3);
    CHECK(di == doctest::Approx(0.015 - h * 1e-3).epsilon(1e-14));
  }
}

TEST_CASE("trajectory runners: synthesis, replay, and moment assembly") {
  const auto grid = sde::make_grid(0.0, 0.5, 1e-3);

  SUBCASE("mixed") {
    MixedScenario scenario;
    scenario.coeffs = MixedCoefficients::make(1.0, 0.5, 0.0, {0.5, {0.3, 0.0}});
    scenario.means = scalar_means(Complex(0, 0), Complex(0.1, 0.05));
    GaussianFilterState init;
    init.mean = Complex(0.5, 0.0);

    sde::RngStream rng = sde::derive_stream(77, 0);
    const auto synth = run_mixed_synthesized(scenario, init, grid, rng);
    REQUIRE(synth.base.points.size() ==
            static_cast<std::size_t>(grid.n_steps) + 1);
    REQUIRE(synth.v.size() == synth.base.points.size());
    CHECK(synth.base.record.n_obs() == 2);
    CHECK(synth.base.record.n_steps() == grid.n_steps);

    // Moment bookkeeping: pi_n = v + |mean|^2, pi_a2 = w + mean^2.
    for (std::size_t k = 0; k < synth.base.points.size(); k += 100) {
      const auto& p = synth.base.points[k];
      CHECK(std::abs(p.pi_n - (synth.v[k] + std::norm(p.pi_a))) <= 1e-12);
      CHECK(std::abs(p.pi_a2 - (synth.w[k] + p.pi_a * p.pi_a)) <= 1e-12);
      CHECK(p.trace_residual == 0.0);
    }

    // The covariance path is deterministic and shared with the standalone
    // integrator.
    const auto path =
        integrate_covariances(scenario.coeffs, init.v_cov, init.w_cov, grid);
    for (std::size_t k = 0; k < path.v.size(); k += 50) {
      CHECK(std::abs(path.v[k] - synth.v[k]) <= 1e-12);
      CHECK(std::abs(path.w[k] - synth.w[k]) <= 1e-12);
    }

    // Replaying the synthesized record reproduces the trajectory.
    const auto replay =
        run_mixed_on_record(scenario, init, grid, synth.base.record);
    double gap = 0.0;
    for (std::size_t k = 0; k < synth.base.points.size(); ++k) {
      gap = std::max(gap, std::abs(synth.base.points[k].pi_a -
                                   replay.base.points[k].pi_a));
    }
    CHECK(gap <= 1e-12);
  }

  SUBCASE("direct") {
    DirectScenario scenario;
    scenario.coeffs =
        DirectCoefficients::make(1.0, 0.3, 0.5, {0.5, {0.3, 0.1}});
    scenario.means = scalar_means(Complex(0.05, 0.0), Complex(0, 0));
    scenario.means.beta = models::MeanSchedule::constant(Vector(0));
    GaussianFilterState init;
    init.mean = Complex(0.3, -0.1);
    init.v_cov = 0.2;

    sde::RngStream rng = sde::derive_stream(78, 0);
    const auto synth = run_direct_synthesized(scenario, init, grid, rng);
    CHECK(synth.base.record.n_obs() == 1);

    const auto replay =
        run_direct_on_record(scenario, init, grid, synth.base.record);
    double gap = 0.0;
    for (std::size_t k = 0; k < synth.base.points.size(); ++k) {
      gap = std::max(gap, std::abs(synth.base.points[k].pi_a -
                                   replay.base.points[k].pi_a));
    }
    CHECK(gap <= 1e-12);

    // A record from a different grid is rejected.
    const auto grid2 = sde::make_grid(0.0, 0.25, 1e-3);
    CHECK_THROWS_AS(
        run_direct_on_record(scenario, init, grid2, synth.base.record), Error);
  }
}
