#pragma once

#include "common.hpp"
#include "sde.hpp"

namespace sqf::noise {

// Single-mode convenience: n >= 0 and |m|^2 <= n(n+1).
struct ScalarSqueezing {
  double n = 0.0;
  Complex m{0.0, 0.0};
};

// Second-moment data of a stationary Gaussian (squeezed) input field with
// m_sq modes: dA_j dA_k* = (delta_jk + N_kj) dt, dA_j* dA_k = N_jk dt,
// dA_j dA_k = M_jk dt, dA_j* dA_k* = M*_kj dt. N must be Hermitian and M
// symmetric; physicality is the positivity of the quadrature covariance
// against the symplectic form (C + iJ >= 0).
struct SqueezingSpec {
  Matrix n_mat;  // m_sq x m_sq, Hermitian
  Matrix m_mat;  // m_sq x m_sq, symmetric

  Eigen::Index modes() const { return n_mat.rows(); }

  static SqueezingSpec vacuum(Eigen::Index m_sq);
  static SqueezingSpec scalar(Complex n, Complex m);
  static SqueezingSpec scalar(const ScalarSqueezing& sq);
};

// Symmetric positive-definite observation correlation matrix K with its
// inverse and determinant (for the two-observation beamsplitter example the
// determinant equals Delta = (1+n)^2 - |m|^2).
struct CorrelationMatrix {
  RealMatrix k_mat;
  RealMatrix k_inv;
  double delta = 0.0;

  Eigen::Index size() const { return k_mat.rows(); }
};

// Fixed validation tolerances (see module docs in the README).
inline constexpr double kStructureTol = 1e-12;
inline constexpr double kPhysicalityTol = 1e-10;

// Checks Hermiticity of N, symmetry of M, and physicality of the implied
// quadrature covariance (single mode additionally: n >= 0 and
// |m|^2 <= n(n+1) + 1e-12). Throws Error(physicality/invalid_argument).
void validate_squeezing(const SqueezingSpec& spec);

// Quadrature covariance in (Q1, P1, Q2, P2, ...) ordering:
//   C^QQ = I + N + N^T + M + M*,   C^PP = I + N + N^T - M - M*,
//   C^QP_jk = 2 Im N_jk + 2 Im M_jk (symmetrised Ito product).
// Also verifies min eig(C + iJ) >= -1e-10.
RealMatrix build_quadrature_covariance(const SqueezingSpec& spec);

// The two-observation correlation matrix of the 50-50 beamsplitter example:
//   K = [[1+n+m', m''], [m'', 1+n-m']],  Delta = (1+n)^2 - |m|^2.
CorrelationMatrix build_example_K(const ScalarSqueezing& sq);

// General observation correlation matrix from the observation coefficients
// (T: n_obs x m_Fock on the Fock channels, U: n_obs x m_sq on the squeezed
// channels):
//   Z_ab = (T T†)_ab + (U U†)_ab   (must be symmetric: commuting observations)
//   K_ab = Z_ab + U_ak N_jk U*_bj + U*_ak N_jk U_bj
//               + U_ak M_jk U_bj + U*_ak M*_jk U*_bj.
// Throws noncommuting_observations if Z is not symmetric within 1e-10 and
// singular_noise if K is not positive definite.
CorrelationMatrix build_general_K(const Matrix& t_mat, const Matrix& u_mat,
                                  const SqueezingSpec& spec);

// Turns a symmetric PD matrix into a CorrelationMatrix (inverse + det),
// verifying symmetry and positive definiteness.
CorrelationMatrix make_correlation(const RealMatrix& k);

// Draws one vector of correlated observation increments with covariance
// K dt: dI = chol_lower(K) z sqrt(dt), z iid standard normal. The
// lower-triangular factor is fixed so a given stream yields identical
// increments across runs and platforms.
RealVector sample_correlated_increments(const CorrelationMatrix& corr,
                                        double dt, sde::RngStream& rng);

}  // namespace sqf::noise
