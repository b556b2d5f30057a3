#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "hilbert.hpp"
#include "models.hpp"

using namespace sqf;

namespace {

double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

models::BuiltScenario reference_mixed(Eigen::Index dim) {
  models::CavityMixedParams p;
  p.dim = dim;
  p.kappa = 2.0;
  p.omega = 0.7;
  p.phi = 0.4;
  p.squeeze = {0.5, {0.3, 0.0}};
  p.alpha0 = Complex(0.1, -0.2);
  p.beta0 = Complex(0.2, 0.1);
  return models::cavity_mixed_model(p);
}

models::BuiltScenario reference_direct(Eigen::Index dim) {
  models::CavityDirectParams p;
  p.dim = dim;
  p.gamma = 2.0;
  p.omega = 0.3;
  p.theta = 0.6;
  p.squeeze = {0.5, {0.3, 0.1}};
  p.alpha0 = Complex(0.05, 0.0);
  return models::cavity_direct_model(p);
}

}  // namespace

TEST_CASE("mixed cavity model has the documented structure") {
  const Eigen::Index dim = 6;
  const auto sc = reference_mixed(dim);
  const Matrix a = hilbert::annihilator(dim);

  CHECK(sc.model.n_fock == 1);
  CHECK(sc.model.n_sq == 1);
  CHECK(max_abs(sc.model.l_ops[0] - std::sqrt(2.0) * a) <= 1e-14);
  CHECK(max_abs(sc.model.r_ops[0]) == 0.0);
  CHECK(max_abs(sc.model.h_op - 0.7 * hilbert::number_operator(dim)) <= 1e-14);
  CHECK(max_abs(sc.model.s_mat - std::exp(Complex(0.0, 0.4)) *
                                     Matrix::Identity(dim, dim)) <= 1e-14);

  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(sc.obs.t_mat(0, 0) - Complex(r, 0.0)) <= 1e-15);
  CHECK(std::abs(sc.obs.t_mat(1, 0) - Complex(0.0, -r)) <= 1e-15);
  CHECK(std::abs(sc.obs.u_mat(0, 0) - Complex(r, 0.0)) <= 1e-15);
  CHECK(std::abs(sc.obs.u_mat(1, 0) - Complex(0.0, r)) <= 1e-15);

  CHECK(sc.means.alpha.at(0.0)(0) == Complex(0.1, -0.2));
  CHECK(sc.means.beta.at(0.0)(0) == Complex(0.2, 0.1));

  CHECK_NOTHROW(models::validate_model(sc.model));
  CHECK_NOTHROW(models::validate_observations(sc.obs, sc.model));
}

TEST_CASE("direct cavity model has the documented structure") {
  const Eigen::Index dim = 5;
  const auto sc = reference_direct(dim);
  const Matrix a = hilbert::annihilator(dim);

  CHECK(sc.model.n_fock == 0);
  CHECK(sc.model.n_sq == 1);
  CHECK(sc.model.l_ops.empty());
  CHECK(max_abs(sc.model.r_ops[0] - std::sqrt(2.0) * a) <= 1e-14);
  CHECK(sc.obs.t_mat.cols() == 0);
  CHECK(std::abs(sc.obs.u_mat(0, 0) - std::exp(Complex(0.0, 0.6))) <= 1e-15);
}

TEST_CASE("model validation accepts roundoff and rejects real defects") {
  auto sc = reference_mixed(5);

  // Hamiltonian hermiticity: 1e-12 is tolerated, 1e-6 and 1e-3 are not.
  auto h_probe = sc;
  h_probe.model.h_op(0, 1) += Complex(0.0, 1e-12);
  CHECK_NOTHROW(models::validate_model(h_probe.model));
  h_probe = sc;
  h_probe.model.h_op(0, 1) += Complex(0.0, 1e-6);
  CHECK_THROWS_AS(models::validate_model(h_probe.model), Error);
  h_probe = sc;
  h_probe.model.h_op(0, 1) += Complex(1e-3, 0.0);
  CHECK_THROWS_AS(models::validate_model(h_probe.model), Error);

  // Scattering unitarity: same graded probes.
  auto s_probe = sc;
  s_probe.model.s_mat *= (1.0 + 1e-12);
  CHECK_NOTHROW(models::validate_model(s_probe.model));
  s_probe = sc;
  s_probe.model.s_mat *= (1.0 + 1e-6);
  CHECK_THROWS_AS(models::validate_model(s_probe.model), Error);
  s_probe = sc;
  s_probe.model.s_mat *= (1.0 + 1e-3);
  CHECK_THROWS_AS(models::validate_model(s_probe.model), Error);
  try {
    s_probe.model.s_mat *= 2.0;
    models::validate_model(s_probe.model);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::physicality);
  }

  // Structural mismatches are dimension errors.
  auto d_probe = sc;
  d_probe.model.l_ops.clear();
  try {
    models::validate_model(d_probe.model);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension);
  }
}

TEST_CASE("observation validation requires independent, admissible rows") {
  const auto sc = reference_mixed(4);

  // No rows at all.
  models::ObservationSpec empty{Matrix(0, 1), Matrix(0, 1)};
  CHECK_THROWS_AS(models::validate_observations(empty, sc.model), Error);

  // Linearly dependent rows of [T U].
  models::ObservationSpec dependent{Matrix(2, 1), Matrix(2, 1)};
  dependent.t_mat << Complex(1.0, 0.0), Complex(2.0, 0.0);
  dependent.u_mat << Complex(0.5, 0.0), Complex(1.0, 0.0);
  CHECK_THROWS_AS(models::validate_observations(dependent, sc.model), Error);

  // More observations than channels.
  models::ObservationSpec extra{Matrix(3, 1), Matrix(3, 1)};
  extra.t_mat << Complex(1, 0), Complex(0, 1), Complex(1, 1);
  extra.u_mat << Complex(0, 1), Complex(1, 0), Complex(1, -1);
  CHECK_THROWS_AS(models::validate_observations(extra, sc.model), Error);
}

TEST_CASE("damping operators from the coupling and squeezing data") {
  const Eigen::Index dim = 8;
  const Matrix a = hilbert::annihilator(dim);
  const Matrix adag = hilbert::creator(dim);

  // Mixed cavity with vacuum reference: K_B = (kappa/2) a†a, K_A = 0.
  models::CavityMixedParams mp;
  mp.dim = dim;
  mp.kappa = 2.0;
  const auto mixed = models::cavity_mixed_model(mp);
  const auto mixed_k = models::build_k_operators(mixed.model);
  CHECK(max_abs(mixed_k.k_b - adag * a) <= 1e-13);
  CHECK(max_abs(mixed_k.k_a) <= 1e-13);

  // Direct cavity: K_A = (gamma/2)[(1+n) a†a + n a a† - m a†a† - m̄ a a].
  const double gamma = 2.0, n = 0.5;
  const Complex m(0.3, 0.1);
  models::CavityDirectParams dp;
  dp.dim = dim;
  dp.gamma = gamma;
  dp.squeeze = {n, m};
  const auto direct = models::cavity_direct_model(dp);
  const auto direct_k = models::build_k_operators(direct.model);
  const Matrix expected =
      0.5 * gamma *
      ((1.0 + n) * adag * a + n * a * adag - m * adag * adag -
       std::conj(m) * a * a);
  CHECK(max_abs(direct_k.k_a - expected) <= 1e-13);
  CHECK(max_abs(direct_k.k_b) == 0.0);
}

TEST_CASE("effective observed couplings fold in scattering and means") {
  const Eigen::Index dim = 6;
  const auto sc = reference_mixed(dim);
  const Matrix a = hilbert::annihilator(dim);
  const Matrix id = Matrix::Identity(dim, dim);

  const Complex alpha0(0.1, -0.2), beta0(0.2, 0.1);
  const Complex phase = std::exp(Complex(0.0, 0.4));
  const double r = 1.0 / std::sqrt(2.0);
  const Complex t1(r, 0.0), t2(0.0, -r), u1(r, 0.0), u2(0.0, r);

  const auto ltilde =
      models::build_ltilde(sc.model, sc.means, sc.obs, 0.0);
  REQUIRE(ltilde.size() == 2);
  const Matrix l_eff = std::sqrt(2.0) * a + phase * beta0 * id;
  const Matrix expected_1 = t1 * l_eff + u1 * (alpha0 * id);
  const Matrix expected_2 = t2 * l_eff + u2 * (alpha0 * id);
  CHECK(max_abs(ltilde[0] - expected_1) <= 1e-13);
  CHECK(max_abs(ltilde[1] - expected_2) <= 1e-13);

  // Mixed cavity couples no system operator to the squeezed channel, so the
  // squeezing gain correction vanishes identically.
  const auto rtilde_mixed = models::build_rtilde(sc.model, sc.obs);
  CHECK(max_abs(rtilde_mixed[0]) == 0.0);
  CHECK(max_abs(rtilde_mixed[1]) == 0.0);

  // Direct cavity: Rtilde = sqrt(gamma) a (e^{i theta} n + e^{-i theta} m̄).
  const auto dsc = reference_direct(dim);
  const auto rtilde = models::build_rtilde(dsc.model, dsc.obs);
  REQUIRE(rtilde.size() == 1);
  const Complex u(std::exp(Complex(0.0, 0.6)));
  const Matrix expected_r =
      std::sqrt(2.0) * a * (u * 0.5 + std::conj(u) * std::conj(Complex(0.3, 0.1)));
  CHECK(max_abs(rtilde[0] - expected_r) <= 1e-13);
}

TEST_CASE("raising and lowering the observation index round-trips") {
  const Eigen::Index dim = 5;
  const Matrix a = hilbert::annihilator(dim);
  const noise::CorrelationMatrix corr =
      noise::build_example_K({0.5, {0.3, 0.0}});

  const std::vector<Matrix> ops = {a, a * a};
  const std::vector<Matrix> raised = models::raise_obs_index(corr, ops);
  REQUIRE(raised.size() == 2);
  for (Eigen::Index alpha = 0; alpha < 2; ++alpha) {
    Matrix lowered = Matrix::Zero(dim, dim);
    for (Eigen::Index beta = 0; beta < 2; ++beta) {
      lowered += corr.k_mat(alpha, beta) * raised[static_cast<std::size_t>(beta)];
    }
    CHECK(max_abs(lowered - ops[static_cast<std::size_t>(alpha)]) <= 1e-12);
  }
}

TEST_CASE("mean schedules: constants, right-continuous tables, validation") {
  Vector v0(1), v1(1);
  v0 << Complex(1.0, 0.0);
  v1 << Complex(2.0, -1.0);

  const auto constant = models::MeanSchedule::constant(v0);
  CHECK(constant.at(-10.0)(0) == Complex(1.0, 0.0));
  CHECK(constant.at(10.0)(0) == Complex(1.0, 0.0));
  CHECK(constant.segment_index(3.0) == 0);

  const auto table = models::MeanSchedule::piecewise({0.0, 1.0}, {v0, v1});
  CHECK(table.at(-0.5)(0) == Complex(1.0, 0.0));   // clamps before first knot
  CHECK(table.at(0.0)(0) == Complex(1.0, 0.0));
  CHECK(table.at(0.999)(0) == Complex(1.0, 0.0));
  CHECK(table.at(1.0)(0) == Complex(2.0, -1.0));   // right-continuous
  CHECK(table.at(42.0)(0) == Complex(2.0, -1.0));
  CHECK(table.segment_index(0.5) == 0);
  CHECK(table.segment_index(1.5) == 1);

  CHECK_THROWS_AS(models::MeanSchedule::piecewise({1.0, 0.0}, {v0, v1}), Error);
  CHECK_THROWS_AS(models::MeanSchedule::piecewise({0.0}, {v0, v1}), Error);
  Vector wrong(2);
  wrong << Complex(1, 0), Complex(2, 0);
  CHECK_THROWS_AS(models::MeanSchedule::piecewise({0.0, 1.0}, {v0, wrong}),
                  Error);
}
