#pragma once

#include <utility>
#include <vector>

#include "common.hpp"
#include "models.hpp"
#include "noise.hpp"
#include "sde.hpp"
#include "trajectory.hpp"

namespace sqf::gaussian_filter {

inline constexpr double kVFloorTol = 1e-10;
inline constexpr double kHeisenbergTol = 1e-9;

// Conditional Gaussian summary statistics of the cavity mode:
//   mean  = pi_t(a),
//   v_cov = pi_t(a†a) - |pi_t(a)|^2   (real),
//   w_cov = pi_t(a^2) - pi_t(a)^2     (complex).
struct GaussianFilterState {
  Complex mean{0.0, 0.0};
  double v_cov = 0.0;
  Complex w_cov{0.0, 0.0};
};

void validate_covariances(double v_cov, Complex w_cov);

// Cavity whose Fock-channel output is mixed with a squeezed reference on a
// balanced beamsplitter before two-quadrature detection. Closed form requires
// a real squeezing correlation m; complex m is rejected with a pointer to the
// general filter.
struct MixedCoefficients {
  double kappa = 0.0;
  double omega = 0.0;
  double phi = 0.0;
  double n = 0.0;
  double m = 0.0;      // real by contract
  double delta = 0.0;  // (1+n)^2 - m^2

  static MixedCoefficients make(double kappa, double omega, double phi,
                                const noise::ScalarSqueezing& squeeze);
};

// Cavity driven directly by a squeezed field with homodyne detection at
// quadrature phase theta. Complex m is allowed; k_corr is the quadrature
// variance rate, (dY)^2 = k_corr * dt.
struct DirectCoefficients {
  double gamma = 0.0;
  double omega = 0.0;
  double theta = 0.0;
  double n = 0.0;
  Complex m{0.0, 0.0};
  double k_corr = 0.0;  // 1 + 2n + 2 Re(e^{2 i theta} m)

  static DirectCoefficients make(double gamma, double omega, double theta,
                                 const noise::ScalarSqueezing& squeeze);
};

// Deterministic covariance equations (Riccati form).
std::pair<double, Complex> riccati_rhs_mixed(double v, Complex w,
                                             const MixedCoefficients& c);
std::pair<double, Complex> riccati_rhs_direct(double v, Complex w,
                                              const DirectCoefficients& c);

// Classical RK4 integration of the covariance pair on the grid; returns
// n_steps+1 samples. Invariants (v >= -1e-10 and v(v+1) >= |w|^2 - 1e-9) are
// monitored every step.
struct CovariancePath {
  std::vector<double> v;
  std::vector<Complex> w;
};
template <typename Coeffs>
CovariancePath integrate_covariances(const Coeffs& coeffs, double v0,
                                     Complex w0,
                                     const sde::IntegrationGrid& grid);

// Innovation gains of the mean update at the current covariances. Mixed
// gains multiply the rescaled independent Wiener increments dW_1, dW_2; the
// direct gain multiplies the raw innovation increment dI with (dI)^2 = K dt.
std::pair<Complex, Complex> mean_gains_mixed(double v, Complex w,
                                             const MixedCoefficients& c);
Complex mean_gain_direct(double v, Complex w, const DirectCoefficients& c);

// One Euler–Maruyama step of the conditional mean.
Complex mean_step_mixed(Complex mean, double v, Complex w,
                        const MixedCoefficients& c, Complex beta_t, double dw1,
                        double dw2, double dt);
Complex mean_step_direct(Complex mean, double v, Complex w,
                         const DirectCoefficients& c, Complex alpha_t,
                         double di, double dt);

// Predicted quadrature rates h_alpha: the innovations are
// dI_alpha = dY_alpha - h_alpha dt.
std::pair<double, double> measurement_rates_mixed(Complex mean,
                                                  const MixedCoefficients& c,
                                                  Complex alpha_t,
                                                  Complex beta_t);
double measurement_rate_direct(Complex mean, const DirectCoefficients& c,
                               Complex alpha_t);

std::pair<double, double> innovations_mixed(Complex mean,
                                            const MixedCoefficients& c,
                                            Complex alpha_t, Complex beta_t,
                                            double dy1, double dy2, double dt);
double innovations_direct(Complex mean, const DirectCoefficients& c,
                          Complex alpha_t, double dy, double dt);

// Full-trajectory runners sharing the record/trajectory conventions of the
// general filter; base.points carries pi_t(a) = mean, pi_t(a†a) = v + |mean|^2,
// pi_t(a^2) = w + mean^2, with a zero trace residual (closed form has no
// density matrix to renormalize).
struct GaussianTrajectory {
  Trajectory base;
  std::vector<double> v;   // n_steps + 1 entries
  std::vector<Complex> w;  // n_steps + 1 entries
};

struct MixedScenario {
  MixedCoefficients coeffs;
  models::InputMeans means;  // alpha (squeezed) and beta (Fock) schedules
};

struct DirectScenario {
  DirectCoefficients coeffs;
  models::InputMeans means;
};

GaussianTrajectory run_mixed_synthesized(const MixedScenario& scenario,
                                         const GaussianFilterState& init,
                                         const sde::IntegrationGrid& grid,
                                         sde::RngStream& rng);
GaussianTrajectory run_mixed_on_record(const MixedScenario& scenario,
                                       const GaussianFilterState& init,
                                       const sde::IntegrationGrid& grid,
                                       const MeasurementRecord& record);
GaussianTrajectory run_direct_synthesized(const DirectScenario& scenario,
                                          const GaussianFilterState& init,
                                          const sde::IntegrationGrid& grid,
                                          sde::RngStream& rng);
GaussianTrajectory run_direct_on_record(const DirectScenario& scenario,
                                        const GaussianFilterState& init,
                                        const sde::IntegrationGrid& grid,
                                        const MeasurementRecord& record);

}  // namespace sqf::gaussian_filter
