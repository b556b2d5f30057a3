#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "common.hpp"
#include "models.hpp"

namespace sqf::superop {

inline constexpr double kAdjointTol = 1e-10;

// Deterministic part of the conditional dynamics, held in two equivalent
// forms derived from one term list of left/right multiplications:
//
//   Heisenberg side (observables):     G(X)   = sum_i A_i X B_i
//   Schrödinger side (density matrix): G†(rho) = sum_i B_i rho A_i
//
// The pairing trace(X · G†(rho)) = trace(G(X) · rho) holds exactly term by
// term, so the dual is constructed rather than numerically adjointed; a
// randomized adjointness check still runs at build time as an assembly
// audit, alongside a check that the Heisenberg form annihilates the
// identity (equivalently: the dual is traceless).
class DriftGenerator {
 public:
  // Builds the generator for fixed input means (alpha on squeezed channels,
  // beta on Fock channels). Time-dependent schedules are handled by
  // rebuilding per schedule segment.
  DriftGenerator(const models::SLHModel& model, const Vector& alpha,
                 const Vector& beta);

  Eigen::Index dim() const { return dim_; }

  // Heisenberg action on an observable (dense; used for audits and tests).
  Matrix heisenberg(const Matrix& x) const;

  // Schrödinger action on a density matrix via the sparse superoperator.
  Matrix dual(const Matrix& rho) const;
  void dual_into(const Matrix& rho, Matrix& out) const;

  const Eigen::SparseMatrix<Complex>& dual_matrix() const { return dual_mat_; }

 private:
  void append_term(const Matrix& a, const Matrix& b);
  void finalize();

  Eigen::Index dim_ = 0;
  std::vector<std::pair<Matrix, Matrix>> sandwiches_;
  Matrix left_;   // accumulates X -> left_ * X contributions
  Matrix right_;  // accumulates X -> X * right_ contributions
  Eigen::SparseMatrix<Complex> dual_mat_;
};

}  // namespace sqf::superop
