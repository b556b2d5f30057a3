#include "superop.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "sde.hpp"

namespace sqf::superop {

namespace {

// Deterministic dense test matrix for the build-time audit.
Matrix random_matrix(Eigen::Index dim, sde::RngStream& rng) {
  Matrix m(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      m(i, j) = Complex(rng.normal(), rng.normal());
    }
  }
  return m;
}

}  // namespace

DriftGenerator::DriftGenerator(const models::SLHModel& model,
                               const Vector& alpha, const Vector& beta) {
  models::validate_model(model);
  require(alpha.size() == model.n_sq && beta.size() == model.n_fock,
          ErrorCode::dimension, "input mean lengths must match channel counts");
  dim_ = model.dim;
  const Eigen::Index d = dim_;
  left_ = Matrix::Zero(d, d);
  right_ = Matrix::Zero(d, d);

  // Fock channels: dissipator plus the coherent displacement carried by the
  // scattered mean field V_l = sum_j S_{lj} beta_j (an operator when the
  // scattering entries are operators).
  const bool has_beta = beta.size() > 0 && beta.cwiseAbs().maxCoeff() > 0.0;
  for (Eigen::Index l = 0; l < model.n_fock; ++l) {
    const Matrix& lop = model.l_ops[l];
    const Matrix l_dag = lop.adjoint();
    append_term(l_dag, lop);
    left_ -= 0.5 * (l_dag * lop);
    right_ -= 0.5 * (l_dag * lop);
    if (has_beta) {
      Matrix v = Matrix::Zero(d, d);
      for (Eigen::Index j = 0; j < model.n_fock; ++j) {
        v += model.s_block(l, j) * beta(j);
      }
      const Matrix v_dag = v.adjoint();
      append_term(v_dag, lop);
      left_ -= v_dag * lop;
      append_term(l_dag, v);
      right_ -= l_dag * v;
      append_term(v_dag, v);
    }
  }
  if (has_beta) {
    left_ -= beta.squaredNorm() * Matrix::Identity(d, d);
  }

  // Squeezed channels: thermal/squeezed dissipator. Each channel contributes
  // two sandwich terms whose left factors absorb the N and M couplings, and
  // the matching anticommutator halves.
  const auto& n_mat = model.squeeze.n_mat;
  const auto& m_mat = model.squeeze.m_mat;
  for (Eigen::Index j = 0; j < model.n_sq; ++j) {
    const Matrix& rj = model.r_ops[j];
    const Matrix rj_dag = rj.adjoint();
    Matrix a1 = rj_dag;
    Matrix a2 = Matrix::Zero(d, d);
    for (Eigen::Index k = 0; k < model.n_sq; ++k) {
      const Matrix& rk = model.r_ops[k];
      a1 += n_mat(j, k) * rk.adjoint() - std::conj(m_mat(j, k)) * rk;
      a2 += n_mat(k, j) * rk - m_mat(j, k) * rk.adjoint();
    }
    append_term(a1, rj);
    left_ -= 0.5 * (a1 * rj);
    right_ -= 0.5 * (a1 * rj);
    append_term(a2, rj_dag);
    left_ -= 0.5 * (a2 * rj_dag);
    right_ -= 0.5 * (a2 * rj_dag);
  }

  // Squeezed-channel coherent displacement.
  if (alpha.size() > 0 && alpha.cwiseAbs().maxCoeff() > 0.0) {
    Matrix disp = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < model.n_sq; ++j) {
      disp += std::conj(alpha(j)) * model.r_ops[j];
    }
    left_ += disp.adjoint() - disp;
    right_ += disp - disp.adjoint();
  }

  // Hamiltonian.
  left_ += kI * model.h_op;
  right_ -= kI * model.h_op;

  finalize();
}

void DriftGenerator::append_term(const Matrix& a, const Matrix& b) {
  if (a.cwiseAbs().maxCoeff() == 0.0 || b.cwiseAbs().maxCoeff() == 0.0) return;
  sandwiches_.emplace_back(a, b);
}

Matrix DriftGenerator::heisenberg(const Matrix& x) const {
  require(x.rows() == dim_ && x.cols() == dim_, ErrorCode::dimension,
          "observable dimension mismatch");
  Matrix out = left_ * x + x * right_;
  for (const auto& [a, b] : sandwiches_) {
    out += a * x * b;
  }
  return out;
}

Matrix DriftGenerator::dual(const Matrix& rho) const {
  Matrix out(dim_, dim_);
  dual_into(rho, out);
  return out;
}

void DriftGenerator::dual_into(const Matrix& rho, Matrix& out) const {
  require(rho.rows() == dim_ && rho.cols() == dim_, ErrorCode::dimension,
          "state dimension mismatch");
  require(rho.data() != out.data(), ErrorCode::invalid_argument,
          "dual_into input and output must be distinct");
  out.resize(dim_, dim_);
  Eigen::Map<const Vector> rho_vec(rho.data(), dim_ * dim_);
  Eigen::Map<Vector> out_vec(out.data(), dim_ * dim_);
  out_vec.noalias() = dual_mat_ * rho_vec;
}

void DriftGenerator::finalize() {
  const Eigen::Index d = dim_;

  // Trace audit: the Heisenberg form must annihilate the identity, i.e.
  // sum_i A_i B_i + left + right = 0, which makes the dual traceless.
  Matrix identity_image = left_ + right_;
  double scale = left_.cwiseAbs().maxCoeff() + right_.cwiseAbs().maxCoeff();
  for (const auto& [a, b] : sandwiches_) {
    const Matrix ab = a * b;
    identity_image += ab;
    scale += ab.cwiseAbs().maxCoeff();
  }
  scale = std::max(scale, 1.0);
  const double trace_defect = identity_image.cwiseAbs().maxCoeff();
  if (!(trace_defect <= kAdjointTol * scale)) {
    std::ostringstream msg;
    msg << "drift generator does not annihilate the identity (defect "
        << trace_defect << ", scale " << scale << ")";
    fail(ErrorCode::internal, msg.str());
  }

  // Sparse dual: vec(B rho A) = (A^T ⊗ B) vec(rho) for each sandwich, plus
  // (left^T ⊗ I) for rho*left and (I ⊗ right) for right*rho.
  std::vector<Eigen::Triplet<Complex>> trips;
  for (const auto& [a, b] : sandwiches_) {
    for (Eigen::Index i1 = 0; i1 < d; ++i1) {
      for (Eigen::Index j1 = 0; j1 < d; ++j1) {
        const Complex av = a(j1, i1);
        if (av == Complex(0.0, 0.0)) continue;
        for (Eigen::Index j2 = 0; j2 < d; ++j2) {
          for (Eigen::Index i2 = 0; i2 < d; ++i2) {
            const Complex bv = b(i2, j2);
            if (bv == Complex(0.0, 0.0)) continue;
            trips.emplace_back(i1 * d + i2, j1 * d + j2, av * bv);
          }
        }
      }
    }
  }
  for (Eigen::Index i1 = 0; i1 < d; ++i1) {
    for (Eigen::Index j1 = 0; j1 < d; ++j1) {
      const Complex lv = left_(j1, i1);
      if (lv == Complex(0.0, 0.0)) continue;
      for (Eigen::Index i2 = 0; i2 < d; ++i2) {
        trips.emplace_back(i1 * d + i2, j1 * d + i2, lv);
      }
    }
  }
  for (Eigen::Index i2 = 0; i2 < d; ++i2) {
    for (Eigen::Index j2 = 0; j2 < d; ++j2) {
      const Complex rv = right_(i2, j2);
      if (rv == Complex(0.0, 0.0)) continue;
      for (Eigen::Index i1 = 0; i1 < d; ++i1) {
        trips.emplace_back(i1 * d + i2, i1 * d + j2, rv);
      }
    }
  }
  dual_mat_.resize(d * d, d * d);
  dual_mat_.setFromTriplets(trips.begin(), trips.end());
  dual_mat_.makeCompressed();

  // Randomized adjointness audit of the sparse assembly:
  // trace(X · dual(rho)) must equal trace(heisenberg(X) · rho).
  sde::RngStream rng(0x5eed5eedULL, 0);
  for (int trial = 0; trial < 3; ++trial) {
    const Matrix x = random_matrix(d, rng);
    const Matrix rho = random_matrix(d, rng);
    const Complex via_dual = (dual(rho) * x).trace();
    const Complex via_heis = (rho * heisenberg(x)).trace();
    const double err = std::abs(via_dual - via_heis);
    const double pair_scale =
        std::max(1.0, scale * rho.cwiseAbs().maxCoeff() *
                          x.cwiseAbs().maxCoeff() * static_cast<double>(d));
    if (!(err <= kAdjointTol * pair_scale)) {
      std::ostringstream msg;
      msg << "dual superoperator fails the adjointness audit (error " << err
          << ")";
      fail(ErrorCode::internal, msg.str());
    }
  }
}

}  // namespace sqf::superop
