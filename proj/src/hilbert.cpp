#include "hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace sqf::hilbert {

Matrix annihilator(Eigen::Index dim) {
  require(dim >= 2, ErrorCode::dimension, "Fock dimension must be at least 2");
  Matrix a = Matrix::Zero(dim, dim);
  for (Eigen::Index k = 1; k < dim; ++k) {
    a(k - 1, k) = Complex(std::sqrt(static_cast<double>(k)), 0.0);
  }
  return a;
}

Matrix creator(Eigen::Index dim) { return annihilator(dim).adjoint(); }

Matrix number_operator(Eigen::Index dim) {
  require(dim >= 2, ErrorCode::dimension, "Fock dimension must be at least 2");
  Matrix n = Matrix::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    n(k, k) = Complex(static_cast<double>(k), 0.0);
  }
  return n;
}

Vector coherent_state(Complex alpha0, Eigen::Index dim, double leakage_tol) {
  require(dim >= 2, ErrorCode::dimension, "Fock dimension must be at least 2");
  Vector psi(dim);
  // Build unnormalised amplitudes alpha0^k / sqrt(k!) recursively, then
  // normalise. The recursion avoids overflow for moderate |alpha0|.
  psi(0) = Complex(1.0, 0.0);
  for (Eigen::Index k = 1; k < dim; ++k) {
    psi(k) = psi(k - 1) * alpha0 / std::sqrt(static_cast<double>(k));
  }
  const double truncated_norm2 = psi.squaredNorm();
  const double full_norm2 = std::exp(std::norm(alpha0));
  const double leakage = 1.0 - truncated_norm2 / full_norm2;
  if (!(leakage <= leakage_tol)) {
    std::ostringstream msg;
    msg << "coherent state |alpha0|=" << std::abs(alpha0)
        << " loses probability " << leakage << " at dim=" << dim
        << " (tolerance " << leakage_tol << "); increase the Fock dimension";
    fail(ErrorCode::leakage, msg.str());
  }
  psi /= std::sqrt(truncated_norm2);
  return psi;
}

Matrix pure_density(const Vector& psi) {
  require(psi.size() >= 2, ErrorCode::dimension, "state vector too small");
  return psi * psi.adjoint();
}

void validate_state(const ConditionalState& state) {
  const auto& rho = state.rho;
  require(rho.rows() == rho.cols() && rho.rows() >= 2, ErrorCode::dimension,
          "density matrix must be square with dim >= 2");
  const double trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
  if (!(trace_defect <= kTraceTol)) {
    std::ostringstream msg;
    msg << "density matrix trace deviates from 1 by " << trace_defect;
    fail(ErrorCode::physicality, msg.str());
  }
  const double herm = hermiticity_defect(rho);
  if (!(herm <= kHermiticityTol)) {
    std::ostringstream msg;
    msg << "density matrix Hermiticity defect " << herm;
    fail(ErrorCode::physicality, msg.str());
  }
}

double min_eigenvalue(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(
      ((rho + rho.adjoint()) * 0.5).eval(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void validate_state_spectrum(const ConditionalState& state,
                             double eigenvalue_tol, double leakage_tol) {
  validate_state(state);
  const double lambda_min = min_eigenvalue(state.rho);
  if (!(lambda_min >= -eigenvalue_tol)) {
    std::ostringstream msg;
    msg << "density matrix has eigenvalue " << lambda_min
        << " below the positivity floor -" << eigenvalue_tol;
    fail(ErrorCode::physicality, msg.str());
  }
  const double corner = state.corner_population();
  if (!(corner <= leakage_tol)) {
    std::ostringstream msg;
    msg << "top Fock level holds population " << corner << " (tolerance "
        << leakage_tol << "); increase the Fock dimension";
    fail(ErrorCode::leakage, msg.str());
  }
}

ThirdMoments gaussian_moment_closure(Complex mean, double v_cov,
                                     Complex w_cov) {
  ThirdMoments out;
  const Complex mean_c = std::conj(mean);
  out.adag_a2 = mean_c * w_cov + 2.0 * mean * v_cov + mean_c * mean * mean;
  out.a3 = 3.0 * mean * w_cov + mean * mean * mean;
  return out;
}

}  // namespace sqf::hilbert
