#include "noise.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace sqf::noise {

SqueezingSpec SqueezingSpec::vacuum(Eigen::Index m_sq) {
  return SqueezingSpec{Matrix::Zero(m_sq, m_sq), Matrix::Zero(m_sq, m_sq)};
}

SqueezingSpec SqueezingSpec::scalar(Complex n, Complex m) {
  SqueezingSpec spec;
  spec.n_mat = Matrix::Constant(1, 1, n);
  spec.m_mat = Matrix::Constant(1, 1, m);
  return spec;
}

SqueezingSpec SqueezingSpec::scalar(const ScalarSqueezing& sq) {
  return scalar(Complex(sq.n, 0.0), sq.m);
}

namespace {

// Symplectic form in (Q1, P1, Q2, P2, ...) ordering.
Matrix symplectic_form(Eigen::Index m_sq) {
  Matrix j = Matrix::Zero(2 * m_sq, 2 * m_sq);
  for (Eigen::Index k = 0; k < m_sq; ++k) {
    j(2 * k, 2 * k + 1) = 1.0;
    j(2 * k + 1, 2 * k) = -1.0;
  }
  return j;
}

double min_eigenvalue_hermitian(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.adjoint()),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

void validate_squeezing(const SqueezingSpec& spec) {
  const Eigen::Index m_sq = spec.n_mat.rows();
  require(m_sq >= 0, ErrorCode::invalid_argument,
          "squeezing: negative mode count");
  require(spec.n_mat.cols() == m_sq && spec.m_mat.rows() == m_sq &&
              spec.m_mat.cols() == m_sq,
          ErrorCode::dimension, "squeezing: N and M must be square and same size");
  if (m_sq == 0) return;  // no squeezed channels: trivially valid
  require((spec.n_mat - spec.n_mat.adjoint()).cwiseAbs().maxCoeff() <= kStructureTol,
          ErrorCode::physicality, "squeezing: N must be Hermitian");
  require((spec.m_mat - spec.m_mat.transpose()).cwiseAbs().maxCoeff() <= kStructureTol,
          ErrorCode::physicality, "squeezing: M must be symmetric");

  if (m_sq == 1) {
    const double n = spec.n_mat(0, 0).real();
    const double m2 = std::norm(spec.m_mat(0, 0));
    require(n >= 0.0, ErrorCode::physicality,
            "squeezing: single-mode n must be nonnegative");
    require(m2 <= n * (n + 1.0) + 1e-12, ErrorCode::physicality,
            "squeezing: single-mode |m|^2 must not exceed n(n+1)");
  }

  // Collective physicality: quadrature covariance against the symplectic form.
  build_quadrature_covariance(spec);
}

RealMatrix build_quadrature_covariance(const SqueezingSpec& spec) {
  const Eigen::Index m_sq = spec.n_mat.rows();
  const Matrix& n = spec.n_mat;
  const Matrix& m = spec.m_mat;

  RealMatrix c = RealMatrix::Zero(2 * m_sq, 2 * m_sq);
  for (Eigen::Index j = 0; j < m_sq; ++j) {
    for (Eigen::Index k = 0; k < m_sq; ++k) {
      const double delta = (j == k) ? 1.0 : 0.0;
      const double nsym = (n(j, k) + n(k, j)).real();  // (N + N^T)_jk, real
      const double mre = 2.0 * m(j, k).real();         // (M + M*)_jk
      const double qq = delta + nsym + mre;
      const double pp = delta + nsym - mre;
      const double qp = 2.0 * m(j, k).imag() + 2.0 * n(j, k).imag();
      c(2 * j, 2 * k) = qq;
      c(2 * j + 1, 2 * k + 1) = pp;
      c(2 * j, 2 * k + 1) = qp;
      c(2 * k + 1, 2 * j) = qp;
    }
  }

  const Matrix heisenberg = c.cast<Complex>() + kI * symplectic_form(m_sq);
  require(min_eigenvalue_hermitian(heisenberg) >= -kPhysicalityTol,
          ErrorCode::physicality,
          "squeezing: quadrature covariance violates C + iJ >= 0");
  return c;
}

CorrelationMatrix make_correlation(const RealMatrix& k) {
  require(k.rows() == k.cols() && k.rows() >= 1, ErrorCode::dimension,
          "correlation: K must be square");
  require((k - k.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          ErrorCode::noncommuting_observations,
          "correlation: K must be symmetric");
  Eigen::LLT<RealMatrix> llt(k);
  require(llt.info() == Eigen::Success, ErrorCode::singular_noise,
          "correlation: K must be positive definite");
  CorrelationMatrix corr;
  corr.k_mat = k;
  corr.k_inv = llt.solve(RealMatrix::Identity(k.rows(), k.cols()));
  corr.delta = k.determinant();
  return corr;
}

CorrelationMatrix build_example_K(const ScalarSqueezing& sq) {
  SqueezingSpec spec = SqueezingSpec::scalar(sq.n, sq.m);
  validate_squeezing(spec);
  const double mp = sq.m.real();
  const double mpp = sq.m.imag();
  RealMatrix k(2, 2);
  k << 1.0 + sq.n + mp, mpp,
       mpp, 1.0 + sq.n - mp;
  CorrelationMatrix corr = make_correlation(k);
  corr.delta = (1.0 + sq.n) * (1.0 + sq.n) - std::norm(sq.m);
  return corr;
}

CorrelationMatrix build_general_K(const Matrix& t_mat, const Matrix& u_mat,
                                  const SqueezingSpec& spec) {
  const Eigen::Index n_obs = u_mat.rows();
  require(n_obs >= 1, ErrorCode::invalid_argument,
          "observations: at least one observation required");
  require(t_mat.rows() == 0 || t_mat.rows() == n_obs, ErrorCode::dimension,
          "observations: T and U must have the same number of rows");
  require(u_mat.cols() == spec.modes(), ErrorCode::dimension,
          "observations: U columns must match the squeezed mode count");

  Matrix z = u_mat * u_mat.adjoint();
  if (t_mat.rows() == n_obs && t_mat.cols() > 0) z += t_mat * t_mat.adjoint();
  require((z - z.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          ErrorCode::noncommuting_observations,
          "observations: Z = TT† + UU† must be symmetric "
          "(the chosen observations do not commute)");

  // K = Z + U N^T U† + conj(U N U†) + U M U^T + conj(U M U^T)
  // (index form: K_ab = Z_ab + U_ak N_jk U*_bj + U*_ak N_jk U_bj
  //                        + U_ak M_jk U_bj + U*_ak M*_jk U*_bj).
  const Matrix un1 = u_mat * spec.n_mat.transpose() * u_mat.adjoint();
  const Matrix un2 = (u_mat * spec.n_mat * u_mat.adjoint()).conjugate();
  const Matrix um = u_mat * spec.m_mat * u_mat.transpose();
  const Matrix k_cplx = z + un1 + un2 + um + um.conjugate();
  require(k_cplx.imag().cwiseAbs().maxCoeff() <= 1e-10, ErrorCode::internal,
          "observations: K acquired an imaginary part");
  return make_correlation(k_cplx.real());
}

RealVector sample_correlated_increments(const CorrelationMatrix& corr,
                                        double dt, sde::RngStream& rng) {
  require(dt > 0.0, ErrorCode::invalid_argument, "sampling: dt must be positive");
  Eigen::LLT<RealMatrix> llt(corr.k_mat);
  require(llt.info() == Eigen::Success, ErrorCode::singular_noise,
          "sampling: K must be positive definite");
  RealVector z(corr.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  const RealVector correlated = llt.matrixL() * z;
  return std::sqrt(dt) * correlated;
}

}  // namespace sqf::noise
