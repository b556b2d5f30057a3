#pragma once

#include "common.hpp"

namespace sqf::hilbert {

inline constexpr double kTraceTol = 1e-9;
inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kEigenvalueTol = 1e-8;
inline constexpr double kDefaultLeakageTol = 1e-6;

// Annihilation operator on the dim-level truncated Fock space:
// a[k-1, k] = sqrt(k). The canonical commutator [a, a†] equals the identity
// except for the -(dim-1) corner entry introduced by truncation.
Matrix annihilator(Eigen::Index dim);
Matrix creator(Eigen::Index dim);
Matrix number_operator(Eigen::Index dim);

// Normalised coherent-state vector with amplitude alpha0, truncated to dim
// levels. Throws Error(leakage) when the discarded tail exceeds leakage_tol
// (the message suggests enlarging dim).
Vector coherent_state(Complex alpha0, Eigen::Index dim,
                      double leakage_tol = kDefaultLeakageTol);

// Density matrix |psi><psi| for a pure state vector.
Matrix pure_density(const Vector& psi);

// Conditional (filtered) density matrix with its validation contract:
// unit trace within 1e-9, Hermitian within 1e-10, and on demand a spectral
// check (min eigenvalue >= -1e-8) plus a truncation-leakage check on the
// top Fock population.
struct ConditionalState {
  Matrix rho;

  Eigen::Index dim() const { return rho.rows(); }
  double corner_population() const {
    return rho(rho.rows() - 1, rho.cols() - 1).real();
  }
};

// Cheap per-step validation (trace and Hermiticity).
void validate_state(const ConditionalState& state);

// Full validation including the eigenvalue floor and leakage threshold.
void validate_state_spectrum(const ConditionalState& state,
                             double eigenvalue_tol = kEigenvalueTol,
                             double leakage_tol = kDefaultLeakageTol);

double min_eigenvalue(const Matrix& rho);

// Gaussian third-moment closures used by the closed-form filters:
//   <a† a²> = conj(mean) W + 2 mean V + conj(mean) mean²
//   <a³>    = 3 mean W + mean³
// with V = <a†a> - |mean|² and W = <a²> - mean².
struct ThirdMoments {
  Complex adag_a2;
  Complex a3;
};
ThirdMoments gaussian_moment_closure(Complex mean, double v_cov, Complex w_cov);

}  // namespace sqf::hilbert
