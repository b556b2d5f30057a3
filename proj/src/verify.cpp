#include "verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <utility>

#include "gaussian_filter.hpp"
#include "general_filter.hpp"
#include "hilbert.hpp"
#include "lindblad.hpp"
#include "models.hpp"
#include "noise.hpp"
#include "output.hpp"
#include "sde.hpp"
#include "superop.hpp"
#include "trajectory.hpp"

namespace sqf::verify {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Measured value must satisfy measured <= tolerance.
Check bounded(std::string name, double measured, double tolerance,
              std::string details) {
  Check c;
  c.name = std::move(name);
  c.margin = measured;
  c.tolerance = tolerance;
  c.passed = std::isfinite(measured) && measured <= tolerance;
  c.details = std::move(details);
  return c;
}

// Measured value must land inside [lo, hi]; `tolerance` reports hi.
Check in_range(std::string name, double measured, double lo, double hi,
               std::string details) {
  Check c;
  c.name = std::move(name);
  c.margin = measured;
  c.tolerance = hi;
  c.passed = std::isfinite(measured) && measured >= lo && measured <= hi;
  c.details = std::move(details) + " (expected in [" + fmt(lo) + ", " +
              fmt(hi) + "])";
  return c;
}

// Regression direction: the measured value must EXCEED the threshold.
Check must_exceed(std::string name, double measured, double threshold,
                  std::string details) {
  Check c;
  c.name = std::move(name);
  c.margin = measured;
  c.tolerance = threshold;
  c.passed = std::isfinite(measured) && measured > threshold;
  c.details = std::move(details) + " (check passes when the measured value "
              "exceeds the tolerance)";
  return c;
}

Check flag(std::string name, bool ok, std::string details) {
  Check c;
  c.name = std::move(name);
  c.margin = ok ? 1.0 : 0.0;
  c.tolerance = 1.0;
  c.passed = ok;
  c.details = std::move(details);
  return c;
}

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Closed form of dv/dt = -kappa v - kappa v^2 (separable logistic decay).
double logistic_v(double v0, double kappa, double t) {
  const double decay = std::exp(-kappa * t);
  return v0 * decay / (1.0 + v0 * (1.0 - decay));
}

Matrix random_density(sde::RngStream& rng, Eigen::Index dim) {
  Matrix a(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      a(i, j) = Complex(rng.normal(), rng.normal());
    }
  }
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return rho;
}

// ---------------------------------------------------------------------------
// Scenario parameter sets shared by several suites (the cross-validation
// reference configurations).
// ---------------------------------------------------------------------------

models::BuiltScenario reference_mixed_scenario(Eigen::Index dim) {
  models::CavityMixedParams p;
  p.dim = dim;
  p.kappa = 1.0;
  p.omega = 0.5;
  p.phi = 0.0;
  p.squeeze = {0.5, Complex(0.3, 0.0)};
  return models::cavity_mixed_model(p);
}

models::BuiltScenario reference_direct_scenario(Eigen::Index dim) {
  models::CavityDirectParams p;
  p.dim = dim;
  p.gamma = 1.0;
  p.omega = 0.3;
  p.theta = kPi / 6.0;
  p.squeeze = {0.5, Complex(0.3, 0.0)};
  return models::cavity_direct_model(p);
}

gaussian_filter::MixedScenario reference_mixed_gaussian() {
  return {gaussian_filter::MixedCoefficients::make(
              1.0, 0.5, 0.0, {0.5, Complex(0.3, 0.0)}),
          models::InputMeans::constants(Vector::Zero(1), Vector::Zero(1))};
}

gaussian_filter::DirectScenario reference_direct_gaussian() {
  return {gaussian_filter::DirectCoefficients::make(
              1.0, 0.3, kPi / 6.0, {0.5, Complex(0.3, 0.0)}),
          models::InputMeans::constants(Vector::Zero(1), Vector::Zero(0))};
}

double max_pi_a_gap(const Trajectory& a, const Trajectory& b) {
  require(a.points.size() == b.points.size(), ErrorCode::internal,
          "trajectory lengths differ in gap computation");
  double gap = 0.0;
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    gap = std::max(gap, std::abs(a.points[k].pi_a - b.points[k].pi_a));
  }
  return gap;
}

// ---------------------------------------------------------------------------
// riccati_oracles
// ---------------------------------------------------------------------------

Report riccati_oracles() {
  using gaussian_filter::DirectCoefficients;
  using gaussian_filter::MixedCoefficients;
  using gaussian_filter::integrate_covariances;
  using gaussian_filter::riccati_rhs_direct;
  using gaussian_filter::riccati_rhs_mixed;

  Report rep;
  rep.suite = "riccati_oracles";

  {
    // Vacuum covariance equation dv/dt = -v - v^2 against its separable
    // closed form.
    const auto coeffs = MixedCoefficients::make(1.0, 0.0, 0.0, {0.0, 0.0});
    const auto grid = sde::make_grid(0.0, 5.0, 1e-3);
    const auto path = integrate_covariances(coeffs, 1.0, Complex(0.0, 0.0), grid);
    double err = 0.0;
    for (long k = 0; k <= grid.n_steps; ++k) {
      const std::size_t i = static_cast<std::size_t>(k);
      err = std::max(err, std::abs(path.v[i] - logistic_v(1.0, 1.0, grid.time_at(k))));
      err = std::max(err, std::abs(path.w[i]));
    }
    rep.checks.push_back(bounded(
        "mixed_vacuum_logistic", err, 1e-7,
        "RK4 covariance path vs the closed-form logistic solution, T=5, dt=1e-3"));
  }

  {
    // (V, W) = (0, 0) is a fixed point of the mixed covariance flow.
    const auto coeffs =
        MixedCoefficients::make(1.0, 0.0, 0.0, {0.5, Complex(0.3, 0.0)});
    const auto grid = sde::make_grid(0.0, 10.0, 1e-3);
    const auto path = integrate_covariances(coeffs, 0.0, Complex(0.0, 0.0), grid);
    double err = 0.0;
    for (std::size_t i = 0; i < path.v.size(); ++i) {
      err = std::max(err, std::abs(path.v[i]));
      err = std::max(err, std::abs(path.w[i]));
    }
    rep.checks.push_back(bounded(
        "mixed_fixed_point_origin", err, 1e-12,
        "covariances started at the coherent-state fixed point stay there, T=10"));
  }

  {
    // (V, W) = (n, m) is a fixed point of the direct covariance flow at
    // omega = 0.
    const auto coeffs =
        DirectCoefficients::make(1.0, 0.0, kPi / 6.0, {0.5, Complex(0.3, 0.0)});
    const auto grid = sde::make_grid(0.0, 10.0, 1e-3);
    const auto path =
        integrate_covariances(coeffs, 0.5, Complex(0.3, 0.0), grid);
    double err = 0.0;
    for (std::size_t i = 0; i < path.v.size(); ++i) {
      err = std::max(err, std::abs(path.v[i] - 0.5));
      err = std::max(err, std::abs(path.w[i] - Complex(0.3, 0.0)));
    }
    rep.checks.push_back(bounded(
        "direct_fixed_point_thermal", err, 1e-12,
        "covariances started at the input second moments (n, m) stay there "
        "at omega=0, T=10"));
  }

  {
    // Pinned arithmetic: n=1, m=1, kappa=1, omega=0, V=1, W=0.5 gives
    // dV = -1.5 and dW = -0.75 (Delta = 3).
    const auto coeffs =
        MixedCoefficients::make(1.0, 0.0, 0.0, {1.0, Complex(1.0, 0.0)});
    const auto [dv, dw] = riccati_rhs_mixed(1.0, Complex(0.5, 0.0), coeffs);
    const double err =
        std::max(std::abs(dv + 1.5), std::abs(dw - Complex(-0.75, 0.0)));
    rep.checks.push_back(bounded(
        "mixed_rhs_pinned_value", err, 1e-12,
        "hand-computed covariance slope at V=1, W=0.5, n=m=1"));
  }

  {
    // Pinned arithmetic: gamma=1, n=1, m=0, theta=0, omega=0, V=W=0 gives
    // K=3, dV=2/3, dW=-1/3.
    const auto coeffs = DirectCoefficients::make(1.0, 0.0, 0.0, {1.0, 0.0});
    const auto [dv, dw] = riccati_rhs_direct(0.0, Complex(0.0, 0.0), coeffs);
    double err = std::abs(coeffs.k_corr - 3.0);
    err = std::max(err, std::abs(dv - 2.0 / 3.0));
    err = std::max(err, std::abs(dw - Complex(-1.0 / 3.0, 0.0)));
    rep.checks.push_back(bounded(
        "direct_rhs_pinned_value", err, 1e-12,
        "hand-computed covariance slope at the origin, n=1, m=0"));
  }

  {
    // The direct covariance flow contracts: two distinct initializations
    // agree at T=25 within 1e-8.
    const auto coeffs =
        DirectCoefficients::make(1.0, 0.3, kPi / 6.0, {0.5, Complex(0.3, 0.0)});
    const auto grid = sde::make_grid(0.0, 25.0, 1e-3);
    const auto pa = integrate_covariances(coeffs, 0.0, Complex(0.0, 0.0), grid);
    const auto pb = integrate_covariances(coeffs, 2.0, Complex(0.5, 0.0), grid);
    const double diff = std::abs(pa.v.back() - pb.v.back()) +
                        std::abs(pa.w.back() - pb.w.back());
    rep.checks.push_back(bounded(
        "direct_steady_state_contraction", diff, 1e-8,
        "terminal covariance difference for initializations (0,0) and (2,0.5)"));
  }

  return rep;
}

// ---------------------------------------------------------------------------
// vacuum_reduction
// ---------------------------------------------------------------------------

Report vacuum_reduction() {
  using gaussian_filter::DirectCoefficients;
  using gaussian_filter::MixedCoefficients;
  using gaussian_filter::integrate_covariances;
  using gaussian_filter::riccati_rhs_direct;
  using gaussian_filter::riccati_rhs_mixed;

  Report rep;
  rep.suite = "vacuum_reduction";

  const Eigen::Index dim = 12;
  models::CavityMixedParams mp;
  mp.dim = dim;
  mp.kappa = 1.0;
  mp.omega = 0.7;
  mp.phi = 0.4;
  mp.squeeze = {0.0, 0.0};
  const auto mixed = models::cavity_mixed_model(mp);

  models::CavityDirectParams dp;
  dp.dim = dim;
  dp.gamma = 1.0;
  dp.omega = 0.7;
  dp.theta = 0.0;
  dp.squeeze = {0.0, 0.0};
  const auto direct = models::cavity_direct_model(dp);

  {
    // With vacuum inputs both scenario families share one unconditional
    // generator (kappa = gamma); the beamsplitter scattering phase must not
    // enter the drift.
    general_filter::GeneralFilter fm(mixed);
    general_filter::GeneralFilter fd(direct);
    sde::RngStream rng(0x7ac0, 0);
    double err = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const Matrix rho = random_density(rng, dim);
      err = std::max(
          err, (fm.drift(rho, 0.0) - fd.drift(rho, 0.0)).cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(bounded(
        "unconditional_generator_match", err, 1e-12,
        "vacuum-input mixed and direct models produce the same drift image "
        "on random states"));
  }

  {
    // The V equations of the two closed-form filters coincide on the W=0
    // slice (the W equations differ: two-quadrature vs single-quadrature
    // detection).
    const auto cm = MixedCoefficients::make(1.0, 0.7, 0.4, {0.0, 0.0});
    const auto cd = DirectCoefficients::make(1.0, 0.7, 0.0, {0.0, 0.0});
    double err = 0.0;
    for (double v : {0.0, 0.25, 0.7, 1.5, 2.5}) {
      const auto [dvm, dwm] = riccati_rhs_mixed(v, Complex(0.0, 0.0), cm);
      const auto [dvd, dwd] = riccati_rhs_direct(v, Complex(0.0, 0.0), cd);
      (void)dwd;
      err = std::max(err, std::abs(dvm - dvd));
      err = std::max(err, std::abs(dwm));  // W=0 is invariant for the mixed flow
    }
    rep.checks.push_back(bounded(
        "covariance_v_equation_slice", err, 1e-12,
        "dV/dt of both filters agrees on the W=0 slice at vacuum, kappa=gamma"));
  }

  {
    // The squeezing-induced gain correction vanishes at vacuum.
    double rmax = 0.0;
    for (const auto& op : models::build_rtilde(mixed.model, mixed.obs)) {
      rmax = std::max(rmax, op.cwiseAbs().maxCoeff());
    }
    for (const auto& op : models::build_rtilde(direct.model, direct.obs)) {
      rmax = std::max(rmax, op.cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(bounded(
        "squeezing_gain_correction_vanishes", rmax, 1e-15,
        "Rtilde operators are identically zero for vacuum inputs"));
  }

  {
    // The observation correlation matrix reduces to the identity at vacuum.
    const auto km = noise::build_general_K(mixed.obs.t_mat, mixed.obs.u_mat,
                                           mixed.model.squeeze);
    const auto kd = noise::build_general_K(direct.obs.t_mat, direct.obs.u_mat,
                                           direct.model.squeeze);
    double err = (km.k_mat - RealMatrix::Identity(2, 2)).cwiseAbs().maxCoeff();
    err = std::max(err, std::abs(kd.k_mat(0, 0) - 1.0));
    rep.checks.push_back(bounded(
        "correlation_matrix_identity", err, 1e-12,
        "K reduces to the identity for vacuum inputs in both scenarios"));
  }

  {
    // Vacuum covariance flow obeys the logistic closed form (short horizon).
    const auto cm = MixedCoefficients::make(1.0, 0.7, 0.4, {0.0, 0.0});
    const auto grid = sde::make_grid(0.0, 2.0, 1e-3);
    const auto path = integrate_covariances(cm, 1.0, Complex(0.0, 0.0), grid);
    double err = 0.0;
    for (long k = 0; k <= grid.n_steps; ++k) {
      err = std::max(err, std::abs(path.v[static_cast<std::size_t>(k)] -
                                   logistic_v(1.0, 1.0, grid.time_at(k))));
    }
    rep.checks.push_back(bounded(
        "vacuum_covariance_logistic", err, 1e-8,
        "vacuum limit of the mixed covariance flow matches the logistic form"));
  }

  return rep;
}

// ---------------------------------------------------------------------------
// pathwise
// ---------------------------------------------------------------------------

// Propagates the direct-scenario closed-form filter with a deliberately wrong
// Wiener normalization in the W equation (1/2 in place of 1/K on the squared
// gain term); used as a regression that the shared-record agreement is
// sensitive to the noise normalization.
std::vector<Complex> run_direct_broken_means(
    const gaussian_filter::DirectCoefficients& c,
    const gaussian_filter::GaussianFilterState& init,
    const sde::IntegrationGrid& grid, const MeasurementRecord& record) {
  const Complex e_minus = std::polar(1.0, -c.theta);
  const Complex e_plus = std::polar(1.0, c.theta);
  const auto rhs = [&](double, const Eigen::Vector3d& s) -> Eigen::Vector3d {
    const double v = s[0];
    const Complex w(s[1], s[2]);
    const Complex g = e_minus * (v - c.n) + e_plus * (w - c.m);
    const double dv = -c.gamma * (v - c.n) - (c.gamma / c.k_corr) * std::norm(g);
    const Complex dw = Complex(0.0, -2.0 * c.omega) * w - c.gamma * (w - c.m) -
                       0.5 * c.gamma * g * g;
    return Eigen::Vector3d(dv, dw.real(), dw.imag());
  };

  Complex mean = init.mean;
  Eigen::Vector3d s(init.v_cov, init.w_cov.real(), init.w_cov.imag());
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  out.push_back(mean);
  for (long k = 0; k < grid.n_steps; ++k) {
    const double t = grid.time_at(k);
    const double h =
        gaussian_filter::measurement_rate_direct(mean, c, Complex(0.0, 0.0));
    const double di = record.dy(0, k) - h * grid.dt;
    mean = gaussian_filter::mean_step_direct(mean, s[0], Complex(s[1], s[2]), c,
                                             Complex(0.0, 0.0), di, grid.dt);
    s = sde::rk4_step(rhs, t, s, grid.dt);
    if (!std::isfinite(mean.real()) || !std::isfinite(mean.imag()) ||
        !s.allFinite()) {
      // The wrong normalization may blow up; report the path up to here.
      break;
    }
    out.push_back(mean);
  }
  return out;
}

Report pathwise() {
  Report rep;
  rep.suite = "pathwise";

  const Eigen::Index dim = 40;
  const double t_end = 2.0;
  const std::array<double, 3> dts{5e-5, 1e-4, 2e-4};
  const Matrix rho0 =
      hilbert::pure_density(hilbert::coherent_state(Complex(0.5, 0.0), dim));
  const gaussian_filter::GaussianFilterState init{Complex(0.5, 0.0), 0.0,
                                                  Complex(0.0, 0.0)};

  const auto gap_checks = [&](const std::string& label,
                              const std::array<double, 3>& gaps) {
    std::ostringstream detail;
    detail << "max |pi(a)| gap, general vs closed form on a shared record; "
              "gaps per dt {";
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      detail << (i ? ", " : "") << fmt(dts[i]) << ": " << fmt(gaps[i]);
    }
    detail << "}";
    rep.checks.push_back(
        bounded(label + "_gap_dt_1e-4", gaps[1], 1e-2, detail.str()));
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      xs.push_back(std::log(dts[i]));
      ys.push_back(std::log(gaps[i]));
    }
    rep.checks.push_back(in_range(
        label + "_gap_slope", lsq_slope(xs, ys), 0.7, 1.3,
        "refinement order of the cross-filter gap under dt halving"));
  };

  std::array<MeasurementRecord, 3> recs;

  {
    // Mixed scenario: synthesize the finest record once, coarsen twice, and
    // run both filters on every resolution.
    const auto scenario = reference_mixed_scenario(dim);
    const auto gscn = reference_mixed_gaussian();
    const auto grid_f = sde::make_grid(0.0, t_end, dts[0]);
    auto rng = sde::derive_stream(910001, 0);
    Trajectory traj_f =
        general_filter::run_filter_synthesized(scenario, rho0, grid_f, rng);
    recs[0] = traj_f.record;
    recs[1] = coarsen_record(recs[0]);
    recs[2] = coarsen_record(recs[1]);

    std::array<double, 3> gaps{};
    for (std::size_t i = 0; i < dts.size(); ++i) {
      const auto grid_i = sde::make_grid(0.0, t_end, dts[i]);
      const Trajectory gen =
          (i == 0) ? std::move(traj_f)
                   : general_filter::run_filter_on_record(scenario, rho0,
                                                          grid_i, recs[i]);
      const auto gau =
          gaussian_filter::run_mixed_on_record(gscn, init, grid_i, recs[i]);
      gaps[i] = max_pi_a_gap(gen, gau.base);
    }
    gap_checks("mixed", gaps);
  }

  {
    // Direct scenario, plus the wrong-normalization regression at dt=1e-4.
    const auto scenario = reference_direct_scenario(dim);
    const auto gscn = reference_direct_gaussian();
    const auto grid_f = sde::make_grid(0.0, t_end, dts[0]);
    auto rng = sde::derive_stream(910002, 0);
    Trajectory traj_f =
        general_filter::run_filter_synthesized(scenario, rho0, grid_f, rng);
    recs[0] = traj_f.record;
    recs[1] = coarsen_record(recs[0]);
    recs[2] = coarsen_record(recs[1]);

    std::array<double, 3> gaps{};
    double broken_gap = 0.0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
      const auto grid_i = sde::make_grid(0.0, t_end, dts[i]);
      const Trajectory gen =
          (i == 0) ? std::move(traj_f)
                   : general_filter::run_filter_on_record(scenario, rho0,
                                                          grid_i, recs[i]);
      const auto gau =
          gaussian_filter::run_direct_on_record(gscn, init, grid_i, recs[i]);
      gaps[i] = max_pi_a_gap(gen, gau.base);
      if (i == 1) {
        const auto broken =
            run_direct_broken_means(gscn.coeffs, init, grid_i, recs[i]);
        for (std::size_t k = 0; k < broken.size(); ++k) {
          broken_gap =
              std::max(broken_gap, std::abs(gen.points[k].pi_a - broken[k]));
        }
      }
    }
    gap_checks("direct", gaps);
    rep.checks.push_back(must_exceed(
        "direct_wrong_normalization_fails", broken_gap, 1e-2,
        "replacing the 1/K quadrature-variance normalization by 1/2 in the "
        "W equation must break the shared-record gap bound"));
  }

  return rep;
}

// ---------------------------------------------------------------------------
// ensemble_vs_lindblad
// ---------------------------------------------------------------------------

Report ensemble_vs_lindblad() {
  Report rep;
  rep.suite = "ensemble_vs_lindblad";

  {
    // 2000 innovation-driven conditional trajectories of the thermal-input
    // direct cavity: the ensemble mean photon number must track the
    // unconditional relaxation curve n(1 - e^{-gamma t}) within 3 standard
    // errors at every output time.
    const Eigen::Index dim = 15;
    models::CavityDirectParams p;
    p.dim = dim;
    p.gamma = 1.0;
    p.omega = 0.0;
    p.theta = 0.0;
    p.squeeze = {0.5, 0.0};
    const auto scenario = models::cavity_direct_model(p);
    Matrix rho0 = Matrix::Zero(dim, dim);
    rho0(0, 0) = 1.0;
    const auto grid = sde::make_grid(0.0, 3.0, 1e-3);
    const Eigen::Index stride = 50;
    const long n_traj = 2000;

    std::vector<double> times;
    for (long k = 0; k <= grid.n_steps; k += stride) {
      times.push_back(grid.time_at(k));
    }
    output::EnsembleAccumulator acc(times);
    for (long i = 0; i < n_traj; ++i) {
      auto rng = sde::derive_stream(777001, static_cast<std::uint64_t>(i));
      const Trajectory traj =
          general_filter::run_filter_synthesized(scenario, rho0, grid, rng);
      acc.add(output::observable_rows(traj, stride));
    }
    const RealMatrix mean = acc.mean();
    const RealMatrix sem = acc.sem();
    double worst = 0.0;
    for (Eigen::Index r = 1; r < mean.rows(); ++r) {
      const double target = 0.5 * (1.0 - std::exp(-times[static_cast<std::size_t>(r)]));
      const double dev = std::abs(mean(r, 2) - target);
      worst = std::max(worst, dev / (3.0 * sem(r, 2)));
    }
    rep.checks.push_back(bounded(
        "ensemble_mean_photon_number_3se", worst, 1.0,
        "max |ensemble mean - relaxation curve| / (3 SE) over output times, "
        "2000 trajectories, dt=1e-3, T=3"));
  }

  {
    // Unconditional oracle: photon-number relaxation of the squeezed-driven
    // cavity matches n(1 - e^{-gamma t}) to 1e-6.
    const Eigen::Index dim = 18;
    models::CavityDirectParams p;
    p.dim = dim;
    p.gamma = 1.0;
    p.omega = 0.0;
    p.theta = 0.0;
    p.squeeze = {0.5, 0.0};
    const auto scenario = models::cavity_direct_model(p);
    Matrix rho0 = Matrix::Zero(dim, dim);
    rho0(0, 0) = 1.0;
    const auto grid = sde::make_grid(0.0, 3.0, 1e-3);
    const auto traj = lindblad::run_master_equation(scenario.model,
                                                    scenario.means, rho0, grid);
    double err = 0.0;
    for (const auto& pt : traj.points) {
      err = std::max(err,
                     std::abs(pt.pi_n - 0.5 * (1.0 - std::exp(-pt.t))));
    }
    rep.checks.push_back(bounded(
        "master_equation_photon_relaxation", err, 1e-6,
        "RK4 master equation vs closed-form thermal relaxation"));
  }

  {
    // Unconditional oracle: constant Fock-channel mean drives the mode
    // amplitude through a linear ODE, dz/dt = -(kappa/2 + i omega) z
    // - sqrt(kappa) e^{i phi} beta, solved in closed form.
    const Eigen::Index dim = 14;
    models::CavityMixedParams p;
    p.dim = dim;
    p.kappa = 1.0;
    p.omega = 0.5;
    p.phi = 0.3;
    p.squeeze = {0.4, Complex(0.1, 0.0)};
    p.beta0 = Complex(0.2, 0.1);
    const auto scenario = models::cavity_mixed_model(p);
    Matrix rho0 = Matrix::Zero(dim, dim);
    rho0(0, 0) = 1.0;
    const auto grid = sde::make_grid(0.0, 2.0, 1e-3);
    const auto traj = lindblad::run_master_equation(scenario.model,
                                                    scenario.means, rho0, grid);
    const Complex lambda(0.5, 0.5);
    const Complex force = std::polar(1.0, 0.3) * Complex(0.2, 0.1);
    double err = 0.0;
    for (const auto& pt : traj.points) {
      const Complex target = -(force / lambda) * (1.0 - std::exp(-lambda * pt.t));
      err = std::max(err, std::abs(pt.pi_a - target));
    }
    rep.checks.push_back(bounded(
        "master_equation_forced_mean", err, 1e-6,
        "constant-drive mode amplitude vs the closed-form linear ODE solution"));
  }

  {
    // Unconditional oracle: a bare Hamiltonian rotates the amplitude without
    // changing its magnitude.
    const Eigen::Index dim = 10;
    models::SLHModel model;
    model.dim = dim;
    model.n_fock = 0;
    model.n_sq = 0;
    model.s_mat = Matrix::Zero(0, 0);
    model.h_op = 0.9 * hilbert::number_operator(dim);
    model.squeeze = noise::SqueezingSpec::vacuum(0);
    const auto means = models::InputMeans::constants(Vector::Zero(0), Vector::Zero(0));
    const Matrix rho0 =
        hilbert::pure_density(hilbert::coherent_state(Complex(0.5, 0.0), dim));
    const auto grid = sde::make_grid(0.0, 4.0, 1e-3);
    const auto traj = lindblad::run_master_equation(model, means, rho0, grid);
    const Complex z0 = traj.points.front().pi_a;
    double err = 0.0;
    for (const auto& pt : traj.points) {
      err = std::max(err, std::abs(std::abs(pt.pi_a) - std::abs(z0)));
      const Complex target = z0 * std::exp(Complex(0.0, -0.9 * pt.t));
      err = std::max(err, std::abs(pt.pi_a - target));
    }
    rep.checks.push_back(bounded(
        "master_equation_free_rotation", err, 1e-9,
        "closed-system evolution keeps |<a>| constant and rotates the phase "
        "at the oscillator frequency"));
  }

  {
    // The squeezed bath sources the second moment: d<a^2>/dt from vacuum
    // equals gamma * m at t=0 (complex m exercises the conjugation
    // bookkeeping of the squeezed dissipator).
    const Eigen::Index dim = 10;
    models::CavityDirectParams p;
    p.dim = dim;
    p.gamma = 1.0;
    p.omega = 0.3;
    p.theta = 0.0;
    p.squeeze = {0.4, Complex(0.2, 0.1)};
    const auto scenario = models::cavity_direct_model(p);
    superop::DriftGenerator gen(scenario.model, Vector::Zero(1), Vector::Zero(0));
    Matrix rho0 = Matrix::Zero(dim, dim);
    rho0(0, 0) = 1.0;
    const Matrix a = hilbert::annihilator(dim);
    const Complex rate = expectation(gen.dual(rho0), a * a);
    const double err = std::abs(rate - Complex(0.2, 0.1));
    rep.checks.push_back(bounded(
        "second_moment_squeezing_source", err, 1e-8,
        "d<a^2>/dt at t=0 from vacuum equals gamma*m for complex m"));
  }

  {
    // Closed-form filter ensemble: the mean of pi(a) over innovation-driven
    // paths follows the deterministic drift (innovations are martingale
    // increments).
    const auto gscn = reference_mixed_gaussian();
    const gaussian_filter::GaussianFilterState init{Complex(0.5, 0.0), 1.0,
                                                    Complex(0.0, 0.0)};
    const auto grid = sde::make_grid(0.0, 2.0, 1e-3);
    const Eigen::Index stride = 40;
    const long n_traj = 400;
    std::vector<double> times;
    for (long k = 0; k <= grid.n_steps; k += stride) {
      times.push_back(grid.time_at(k));
    }
    output::EnsembleAccumulator acc(times);
    for (long i = 0; i < n_traj; ++i) {
      auto rng = sde::derive_stream(888001, static_cast<std::uint64_t>(i));
      const auto traj =
          gaussian_filter::run_mixed_synthesized(gscn, init, grid, rng);
      acc.add(output::observable_rows(traj.base, stride));
    }
    const RealMatrix mean = acc.mean();
    const RealMatrix sem = acc.sem();
    const Complex lambda(0.5, 0.5);
    double worst = 0.0;
    for (Eigen::Index r = 1; r < mean.rows(); ++r) {
      const Complex target =
          Complex(0.5, 0.0) *
          std::exp(-lambda * times[static_cast<std::size_t>(r)]);
      worst = std::max(worst, std::abs(mean(r, 0) - target.real()) /
                                  (3.0 * sem(r, 0)));
      worst = std::max(worst, std::abs(mean(r, 1) - target.imag()) /
                                  (3.0 * sem(r, 1)));
    }
    rep.checks.push_back(bounded(
        "gaussian_ensemble_mean_drift", worst, 1.0,
        "max |ensemble mean pi(a) - drift solution| / (3 SE), 400 paths"));
  }

  return rep;
}

// ---------------------------------------------------------------------------
// invariants
// ---------------------------------------------------------------------------

struct InnovationStats {
  RealVector mean;       // empirical increment means
  RealMatrix cov;        // empirical increment covariance
  long n_samples = 0;
};

InnovationStats collect_innovations(const models::BuiltScenario& scenario,
                                    const Matrix& rho0,
                                    const sde::IntegrationGrid& grid,
                                    std::uint64_t seed, long n_traj,
                                    const general_filter::RunOptions& opts) {
  const Eigen::Index n_obs = scenario.obs.n_obs();
  RealVector sum = RealVector::Zero(n_obs);
  RealMatrix sum_sq = RealMatrix::Zero(n_obs, n_obs);
  long count = 0;
  for (long i = 0; i < n_traj; ++i) {
    auto rng = sde::derive_stream(seed, static_cast<std::uint64_t>(i));
    const Trajectory traj = general_filter::run_filter_synthesized(
        scenario, rho0, grid, rng, opts);
    for (Eigen::Index k = 0; k < traj.record.di.cols(); ++k) {
      const auto col = traj.record.di.col(k);
      sum += col;
      sum_sq += col * col.transpose();
      ++count;
    }
  }
  InnovationStats stats;
  stats.n_samples = count;
  stats.mean = sum / static_cast<double>(count);
  stats.cov = sum_sq / static_cast<double>(count) -
              stats.mean * stats.mean.transpose();
  return stats;
}

void innovation_checks(Report& rep, const std::string& label,
                       const InnovationStats& stats, const RealMatrix& k_target,
                       double dt) {
  const double n = static_cast<double>(stats.n_samples);
  double worst_mean = 0.0;
  for (Eigen::Index a = 0; a < stats.mean.size(); ++a) {
    const double sigma = std::sqrt(k_target(a, a) * dt / n);
    worst_mean = std::max(worst_mean, std::abs(stats.mean(a)) / (3.0 * sigma));
  }
  rep.checks.push_back(bounded(
      "innovations_mean_" + label, worst_mean, 1.0,
      "max |empirical mean| / (3 sigma) over increment components, " +
          std::to_string(stats.n_samples) + " samples"));

  double worst_cov = 0.0;
  for (Eigen::Index a = 0; a < k_target.rows(); ++a) {
    for (Eigen::Index b = a; b < k_target.cols(); ++b) {
      const double sigma =
          dt * std::sqrt((k_target(a, a) * k_target(b, b) +
                          k_target(a, b) * k_target(a, b)) /
                         n);
      worst_cov = std::max(worst_cov, std::abs(stats.cov(a, b) -
                                               k_target(a, b) * dt) /
                                          (3.0 * sigma));
    }
  }
  rep.checks.push_back(bounded(
      "innovations_cov_" + label, worst_cov, 1.0,
      "max |empirical covariance - K dt| / (3 sigma) over matrix entries"));
}

Report invariants() {
  using gaussian_filter::DirectCoefficients;
  using gaussian_filter::MixedCoefficients;
  using gaussian_filter::integrate_covariances;

  Report rep;
  rep.suite = "invariants";

  {
    // Observation correlation matrices stay symmetric positive definite over
    // 1000 random physical squeezing parameters, and the general constructor
    // agrees with the two-quadrature beamsplitter closed form for real m.
    sde::RngStream rng(101010, 0);
    double min_eig = std::numeric_limits<double>::infinity();
    double match_err = 0.0;
    bool all_built = true;
    for (int draw = 0; draw < 1000; ++draw) {
      const double n = 3.0 * rng.uniform();
      const double mag =
          std::sqrt(n * (n + 1.0)) * std::sqrt(rng.uniform());
      const double phase = 2.0 * kPi * rng.uniform();
      const Complex m = std::polar(mag, phase);
      try {
        const auto kc = noise::build_example_K({n, m});
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(kc.k_mat,
                                                     Eigen::EigenvaluesOnly);
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());

        // Real-m draw: the general constructor must reproduce the closed form.
        const double m_real = (phase < kPi ? mag : -mag);
        models::CavityMixedParams p;
        p.dim = 4;
        p.kappa = 1.0;
        p.omega = 0.0;
        p.phi = 0.2;
        p.squeeze = {n, Complex(m_real, 0.0)};
        const auto scn = models::cavity_mixed_model(p);
        const auto kg = noise::build_general_K(scn.obs.t_mat, scn.obs.u_mat,
                                               scn.model.squeeze);
        const auto ke = noise::build_example_K({n, Complex(m_real, 0.0)});
        match_err = std::max(
            match_err, (kg.k_mat - ke.k_mat).cwiseAbs().maxCoeff());

        // Direct scenario: scalar K positive for a random detection phase.
        const double theta = 2.0 * kPi * rng.uniform();
        models::CavityDirectParams dp;
        dp.dim = 4;
        dp.gamma = 1.0;
        dp.omega = 0.0;
        dp.theta = theta;
        dp.squeeze = {n, m};
        const auto dscn = models::cavity_direct_model(dp);
        const auto kd = noise::build_general_K(dscn.obs.t_mat, dscn.obs.u_mat,
                                               dscn.model.squeeze);
        min_eig = std::min(min_eig, kd.k_mat(0, 0));
      } catch (const Error&) {
        all_built = false;
      }
    }
    rep.checks.push_back(flag(
        "k_matrices_positive_definite", all_built && min_eig > 0.0,
        "1000 random physical (n, m): construction succeeds, minimum "
        "eigenvalue " + fmt(min_eig)));
    rep.checks.push_back(bounded(
        "general_k_matches_beamsplitter_form", match_err, 1e-12,
        "general K constructor vs the two-quadrature closed form, real m"));
  }

  {
    // A deliberately non-commuting observation pair must be rejected.
    Matrix t_mat(2, 1);
    t_mat(0, 0) = Complex(1.0, 0.0);
    t_mat(1, 0) = Complex(0.0, 1.0);
    const Matrix u_mat(2, 0);
    bool fired = false;
    std::string message;
    try {
      noise::build_general_K(t_mat, u_mat, noise::SqueezingSpec::vacuum(0));
    } catch (const Error& e) {
      fired = e.code() == ErrorCode::noncommuting_observations;
      message = e.what();
    }
    rep.checks.push_back(flag(
        "noncommuting_observations_rejected", fired,
        fired ? "rejected with: " + message
              : "constructor accepted a non-symmetric quadrature overlap"));
  }

  {
    // Per-step trace renormalization is second order in dt. The innovation
    // gains are traceless in exact arithmetic, so in practice the residual
    // sits at the roundoff floor; the O(dt^2) bound is the enforced check
    // and the refinement slope is reported only when the residuals rise
    // above a 1e-12 floor where roundoff would masquerade as slope 0.
    const auto scenario = reference_mixed_scenario(40);
    const Matrix rho0 =
        hilbert::pure_density(hilbert::coherent_state(Complex(0.5, 0.0), 40));
    const std::array<double, 3> dts{4e-4, 2e-4, 1e-4};
    std::array<double, 3> resid{};
    for (std::size_t i = 0; i < dts.size(); ++i) {
      const auto grid = sde::make_grid(0.0, 0.25, dts[i]);
      auto rng = sde::derive_stream(313131, static_cast<std::uint64_t>(i));
      const Trajectory traj =
          general_filter::run_filter_synthesized(scenario, rho0, grid, rng);
      double r = 0.0;
      for (const auto& pt : traj.points) {
        r = std::max(r, std::abs(pt.trace_residual));
      }
      resid[i] = r;
    }
    double bound_margin = 0.0;
    for (std::size_t i = 0; i < dts.size(); ++i) {
      bound_margin = std::max(bound_margin, resid[i] / (dts[i] * dts[i]));
    }
    const bool above_floor =
        *std::min_element(resid.begin(), resid.end()) >= 1e-12;
    bool ok = bound_margin <= 1.0;
    std::ostringstream detail;
    detail << "max per-step residual / dt^2 over dts {4e-4, 2e-4, 1e-4}; "
              "residuals {"
           << fmt(resid[0]) << ", " << fmt(resid[1]) << ", " << fmt(resid[2])
           << "}; ";
    if (above_floor) {
      std::vector<double> xs, ys;
      for (std::size_t i = 0; i < dts.size(); ++i) {
        xs.push_back(std::log(dts[i]));
        ys.push_back(std::log(resid[i]));
      }
      const double slope = lsq_slope(xs, ys);
      ok = ok && slope >= 1.7 && slope <= 2.3;
      detail << "refinement slope " << fmt(slope) << " (required 2 +/- 0.3)";
    } else {
      detail << "residuals at the roundoff floor (< 1e-12): renormalization "
                "is exact to machine precision and the slope is not "
                "measurable; the O(dt^2) bound stands in";
    }
    Check c;
    c.name = "trace_residual_second_order";
    c.margin = bound_margin;
    c.tolerance = 1.0;
    c.passed = ok;
    c.details = detail.str();
    rep.checks.push_back(c);
  }

  {
    // Conditional states stay positive within -1e-6 along the reference
    // cross-validation scenarios at dt = 1e-4.
    double worst = -std::numeric_limits<double>::infinity();
    const Matrix rho_init =
        hilbert::pure_density(hilbert::coherent_state(Complex(0.5, 0.0), 40));
    const auto grid = sde::make_grid(0.0, 2.0, 1e-4);
    const std::array<models::BuiltScenario, 2> scenarios{
        reference_mixed_scenario(40), reference_direct_scenario(40)};
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      general_filter::GeneralFilter filter(scenarios[s]);
      auto rng = sde::derive_stream(424242, static_cast<std::uint64_t>(s));
      Matrix rho = rho_init;
      for (long k = 0; k < grid.n_steps; ++k) {
        const RealVector di = noise::sample_correlated_increments(
            filter.correlation(), grid.dt, rng);
        filter.step_with_innovations(rho, grid.time_at(k), grid.dt, di, k);
        worst = std::max(worst, -hilbert::min_eigenvalue(rho));
      }
    }
    rep.checks.push_back(bounded(
        "positivity_min_eigenvalue", worst, 1e-6,
        "largest negative eigenvalue excursion across both reference "
        "scenarios, dt=1e-4, T=2"));
  }

  {
    // Conditional covariances respect the uncertainty bound
    // V(V+1) >= |W|^2 - 1e-9 along integrated paths.
    double worst = -std::numeric_limits<double>::infinity();
    const auto slack_scan = [&worst](const gaussian_filter::CovariancePath& p) {
      for (std::size_t i = 0; i < p.v.size(); ++i) {
        worst = std::max(worst, std::norm(p.w[i]) - p.v[i] * (p.v[i] + 1.0));
      }
    };
    const auto grid = sde::make_grid(0.0, 10.0, 1e-3);
    slack_scan(integrate_covariances(
        MixedCoefficients::make(1.0, 0.5, 0.0, {0.5, Complex(0.3, 0.0)}), 1.0,
        Complex(0.0, 0.0), grid));
    slack_scan(integrate_covariances(
        MixedCoefficients::make(1.0, 0.0, 0.0, {0.0, 0.0}), 1.0,
        Complex(0.0, 0.0), grid));
    slack_scan(integrate_covariances(
        DirectCoefficients::make(1.0, 0.3, kPi / 6.0, {0.5, Complex(0.3, 0.0)}),
        0.0, Complex(0.0, 0.0), grid));
    slack_scan(integrate_covariances(
        DirectCoefficients::make(1.0, 0.3, kPi / 6.0, {0.5, Complex(0.3, 0.0)}),
        2.0, Complex(0.5, 0.0), grid));
    rep.checks.push_back(bounded(
        "heisenberg_inequality", worst, 1e-9,
        "max of |W|^2 - V(V+1) along four covariance paths"));
  }

  {
    // Third moments of the general filter state match the Gaussian closure
    // along a linear-cavity trajectory started from a coherent state.
    const Eigen::Index dim = 40;
    const auto scenario = reference_mixed_scenario(dim);
    general_filter::GeneralFilter filter(scenario);
    const Matrix a = hilbert::annihilator(dim);
    const Matrix n_op = hilbert::number_operator(dim);
    const Matrix a2 = a * a;
    const Matrix adag_a2 = hilbert::creator(dim) * a2;
    const Matrix a3 = a2 * a;
    Matrix rho =
        hilbert::pure_density(hilbert::coherent_state(Complex(0.5, 0.0), dim));
    const auto grid = sde::make_grid(0.0, 0.2, 1e-5);
    auto rng = sde::derive_stream(220022, 0);
    double err = 0.0;
    for (long k = 0; k < grid.n_steps; ++k) {
      const RealVector di = noise::sample_correlated_increments(
          filter.correlation(), grid.dt, rng);
      filter.step_with_innovations(rho, grid.time_at(k), grid.dt, di, k);
      const Complex z = expectation(rho, a);
      const double v = expectation(rho, n_op).real() - std::norm(z);
      const Complex w = expectation(rho, a2) - z * z;
      const auto closure = hilbert::gaussian_moment_closure(z, v, w);
      err = std::max(err,
                     std::abs(expectation(rho, adag_a2) - closure.adag_a2));
      err = std::max(err, std::abs(expectation(rho, a3) - closure.a3));
    }
    rep.checks.push_back(bounded(
        "gaussian_closure_along_path", err, 1e-4,
        "third moments vs the Gaussian closure along a conditional "
        "trajectory of the linear cavity, dt=1e-5, T=0.2"));
  }

  {
    // Innovation increments are centered with covariance K dt (martingale
    // property), collected through the production trajectory loop.
    // Mixed reference: real m makes the target the two-quadrature closed
    // form diag(1+n+m, 1+n-m).
    {
      models::CavityMixedParams p;
      p.dim = 8;
      p.kappa = 1.0;
      p.omega = 0.0;
      p.phi = 0.0;
      p.squeeze = {0.5, Complex(0.3, 0.0)};
      const auto scenario = models::cavity_mixed_model(p);
      Matrix rho0 = Matrix::Zero(8, 8);
      rho0(0, 0) = 1.0;
      const auto grid = sde::make_grid(0.0, 5.0, 1e-3);
      const auto stats =
          collect_innovations(scenario, rho0, grid, 515001, 200, {});
      RealMatrix k_target(2, 2);
      k_target << 1.8, 0.0, 0.0, 1.2;
      innovation_checks(rep, "mixed", stats, k_target, grid.dt);
    }
    // Direct reference: scalar K = 1 + 2n + 2 Re(e^{2 i theta} m) = 2.3.
    // The increment statistics are dimension-independent, so the Fock
    // truncation is sized for runtime; the corner-population monitor is
    // relaxed accordingly (the thermal tail at dim 12 sits near 1e-5).
    {
      models::CavityDirectParams p;
      p.dim = 12;
      p.gamma = 1.0;
      p.omega = 0.0;
      p.theta = kPi / 6.0;
      p.squeeze = {0.5, Complex(0.3, 0.0)};
      const auto scenario = models::cavity_direct_model(p);
      Matrix rho0 = Matrix::Zero(12, 12);
      rho0(0, 0) = 1.0;
      const auto grid = sde::make_grid(0.0, 5.0, 1e-3);
      general_filter::RunOptions opts;
      opts.leakage_tol = 1e-4;
      const auto stats =
          collect_innovations(scenario, rho0, grid, 515002, 200, opts);
      RealMatrix k_target(1, 1);
      k_target(0, 0) = 2.3;
      innovation_checks(rep, "direct", stats, k_target, grid.dt);
    }
  }

  return rep;
}

}  // namespace

bool Report::passed() const {
  if (checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(),
                     [](const Check& c) { return c.passed; });
}

nlohmann::json Report::to_json() const {
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    const auto safe = [](double v) {
      return std::isfinite(v) ? v : std::copysign(1e308, v);
    };
    checks_json.push_back({{"name", c.name},
                           {"passed", c.passed},
                           {"margin", safe(c.margin)},
                           {"tolerance", safe(c.tolerance)},
                           {"details", c.details}});
  }
  return {{"suite", suite}, {"passed", passed()}, {"checks", checks_json}};
}

std::vector<std::string> suite_names() {
  return {"invariants", "vacuum_reduction", "pathwise", "ensemble_vs_lindblad",
          "riccati_oracles"};
}

Report run_suite(const std::string& suite) {
  if (suite == "riccati_oracles") return riccati_oracles();
  if (suite == "vacuum_reduction") return vacuum_reduction();
  if (suite == "pathwise") return pathwise();
  if (suite == "ensemble_vs_lindblad") return ensemble_vs_lindblad();
  if (suite == "invariants") return invariants();
  std::ostringstream msg;
  msg << "unknown verify suite '" << suite << "'; available:";
  for (const auto& name : suite_names()) msg << " " << name;
  fail(ErrorCode::invalid_argument, msg.str());
}

}  // namespace sqf::verify
