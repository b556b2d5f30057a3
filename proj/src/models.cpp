#include "models.hpp"

#include <Eigen/QR>
#include <cmath>
#include <sstream>
#include <utility>

#include "hilbert.hpp"

namespace sqf::models {

MeanSchedule MeanSchedule::constant(Vector value) {
  MeanSchedule s;
  s.size_ = value.size();
  s.knots_ = {0.0};
  s.values_ = {std::move(value)};
  return s;
}

MeanSchedule MeanSchedule::piecewise(std::vector<double> knots,
                                     std::vector<Vector> values) {
  require(!knots.empty() && knots.size() == values.size(),
          ErrorCode::invalid_argument,
          "piecewise schedule needs one value per knot");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    require(knots[i] < knots[i + 1], ErrorCode::invalid_argument,
            "piecewise schedule knots must be strictly increasing");
  }
  const Eigen::Index size = values.front().size();
  for (const auto& v : values) {
    require(v.size() == size, ErrorCode::invalid_argument,
            "piecewise schedule values must share one length");
    require(v.allFinite(), ErrorCode::invalid_argument,
            "piecewise schedule values must be finite");
  }
  MeanSchedule s;
  s.size_ = size;
  s.knots_ = std::move(knots);
  s.values_ = std::move(values);
  return s;
}

std::size_t MeanSchedule::segment_index(double t) const {
  require(!values_.empty(), ErrorCode::internal, "empty mean schedule");
  // Last knot <= t; times before the first knot use the first value.
  for (std::size_t i = knots_.size(); i-- > 0;) {
    if (knots_[i] <= t) return i;
  }
  return 0;
}

const Vector& MeanSchedule::at(double t) const {
  return values_[segment_index(t)];
}

void validate_model(const SLHModel& model) {
  require(model.dim >= 2, ErrorCode::dimension,
          "system dimension must be at least 2");
  require(model.n_fock >= 0 && model.n_sq >= 0, ErrorCode::dimension,
          "channel counts must be nonnegative");
  require(static_cast<Eigen::Index>(model.l_ops.size()) == model.n_fock,
          ErrorCode::dimension, "need one L operator per Fock channel");
  require(static_cast<Eigen::Index>(model.r_ops.size()) == model.n_sq,
          ErrorCode::dimension, "need one R operator per squeezed channel");
  require(model.squeeze.modes() == model.n_sq, ErrorCode::dimension,
          "squeezing spec size must match the squeezed channel count");
  require(model.h_op.rows() == model.dim && model.h_op.cols() == model.dim,
          ErrorCode::dimension, "Hamiltonian dimension mismatch");
  for (const auto& l : model.l_ops) {
    require(l.rows() == model.dim && l.cols() == model.dim,
            ErrorCode::dimension, "L operator dimension mismatch");
  }
  for (const auto& r : model.r_ops) {
    require(r.rows() == model.dim && r.cols() == model.dim,
            ErrorCode::dimension, "R operator dimension mismatch");
  }

  const double h_defect = hermiticity_defect(model.h_op);
  if (!(h_defect <= kHermiticityTol)) {
    std::ostringstream msg;
    msg << "Hamiltonian is not Hermitian (defect " << h_defect << ")";
    fail(ErrorCode::physicality, msg.str());
  }

  const Eigen::Index s_size = model.n_fock * model.dim;
  require(model.s_mat.rows() == s_size && model.s_mat.cols() == s_size,
          ErrorCode::dimension, "scattering matrix dimension mismatch");
  if (s_size > 0) {
    const double defect =
        (model.s_mat.adjoint() * model.s_mat - Matrix::Identity(s_size, s_size))
            .cwiseAbs()
            .maxCoeff();
    if (!(defect <= kUnitarityTol)) {
      std::ostringstream msg;
      msg << "scattering matrix is not blockwise unitary (defect " << defect
          << ")";
      fail(ErrorCode::physicality, msg.str());
    }
  }

  noise::validate_squeezing(model.squeeze);
}

void validate_observations(const ObservationSpec& obs, const SLHModel& model) {
  require(obs.t_mat.rows() == obs.u_mat.rows(), ErrorCode::dimension,
          "observation coefficient row counts differ");
  require(obs.t_mat.cols() == model.n_fock, ErrorCode::dimension,
          "observation T columns must match the Fock channel count");
  require(obs.u_mat.cols() == model.n_sq, ErrorCode::dimension,
          "observation U columns must match the squeezed channel count");
  const Eigen::Index n_obs = obs.n_obs();
  require(n_obs >= 1, ErrorCode::invalid_argument,
          "at least one observation row required");
  require(n_obs <= model.n_fock + model.n_sq, ErrorCode::invalid_argument,
          "more observation rows than field channels");

  // Row independence of the stacked coefficient matrix [T U].
  Matrix tu(n_obs, model.n_fock + model.n_sq);
  if (model.n_fock > 0) tu.leftCols(model.n_fock) = obs.t_mat;
  if (model.n_sq > 0) tu.rightCols(model.n_sq) = obs.u_mat;
  Eigen::ColPivHouseholderQR<Matrix> qr(tu);
  qr.setThreshold(1e-10);
  if (qr.rank() < n_obs) {
    fail(ErrorCode::invalid_argument,
         "observation rows are linearly dependent");
  }

  // Joint measurability: Z = T T† + U U† must be symmetric (not merely
  // Hermitian); build_general_K performs the same check before inversion.
  const Matrix z = tu * tu.transpose().conjugate();
  const double defect = (z - z.transpose()).cwiseAbs().maxCoeff();
  if (!(defect <= noise::kPhysicalityTol)) {
    std::ostringstream msg;
    msg << "observed quadratures do not commute (Z asymmetry " << defect
        << ")";
    fail(ErrorCode::noncommuting_observations, msg.str());
  }
}

KOperators build_k_operators(const SLHModel& model) {
  validate_model(model);
  const Eigen::Index d = model.dim;
  KOperators out;
  out.k_b = Matrix::Zero(d, d);
  for (const auto& l : model.l_ops) {
    out.k_b += 0.5 * (l.adjoint() * l);
  }
  out.k_a = Matrix::Zero(d, d);
  const auto& n_mat = model.squeeze.n_mat;
  const auto& m_mat = model.squeeze.m_mat;
  for (Eigen::Index j = 0; j < model.n_sq; ++j) {
    const Matrix rj = model.r_ops[j];
    const Matrix rj_dag = rj.adjoint();
    out.k_a += 0.5 * (rj_dag * rj);
    for (Eigen::Index k = 0; k < model.n_sq; ++k) {
      const Matrix& rk = model.r_ops[k];
      const Matrix rk_dag = rk.adjoint();
      out.k_a += 0.5 * n_mat(k, j) * (rj_dag * rk);
      out.k_a += 0.5 * n_mat(j, k) * (rj * rk_dag);
      out.k_a -= 0.5 * m_mat(j, k) * (rj_dag * rk_dag);
      out.k_a -= 0.5 * std::conj(m_mat(j, k)) * (rj * rk);
    }
  }
  return out;
}

std::vector<Matrix> build_ltilde(const SLHModel& model, const InputMeans& means,
                                 const ObservationSpec& obs, double t) {
  const Eigen::Index d = model.dim;
  const Vector& alpha = means.alpha.at(t);
  const Vector& beta = means.beta.at(t);
  require(alpha.size() == model.n_sq, ErrorCode::dimension,
          "alpha schedule length must match squeezed channel count");
  require(beta.size() == model.n_fock, ErrorCode::dimension,
          "beta schedule length must match Fock channel count");

  // Displaced Fock couplings L_k + (S beta)_k; with operator-valued
  // scattering the displacement (S beta)_k is itself an operator.
  std::vector<Matrix> displaced_l(model.n_fock, Matrix::Zero(d, d));
  for (Eigen::Index k = 0; k < model.n_fock; ++k) {
    displaced_l[k] = model.l_ops[k];
    for (Eigen::Index l = 0; l < model.n_fock; ++l) {
      displaced_l[k] += model.s_block(k, l) * beta(l);
    }
  }

  std::vector<Matrix> out(obs.n_obs(), Matrix::Zero(d, d));
  for (Eigen::Index a = 0; a < obs.n_obs(); ++a) {
    for (Eigen::Index k = 0; k < model.n_fock; ++k) {
      out[a] += obs.t_mat(a, k) * displaced_l[k];
    }
    for (Eigen::Index j = 0; j < model.n_sq; ++j) {
      out[a] += obs.u_mat(a, j) *
                (model.r_ops[j] + alpha(j) * Matrix::Identity(d, d));
    }
  }
  return out;
}

std::vector<Matrix> build_rtilde(const SLHModel& model,
                                 const ObservationSpec& obs) {
  const Eigen::Index d = model.dim;
  const auto& n_mat = model.squeeze.n_mat;
  const auto& m_mat = model.squeeze.m_mat;
  std::vector<Matrix> out(obs.n_obs(), Matrix::Zero(d, d));
  for (Eigen::Index a = 0; a < obs.n_obs(); ++a) {
    for (Eigen::Index j = 0; j < model.n_sq; ++j) {
      Complex coeff(0.0, 0.0);
      for (Eigen::Index k = 0; k < model.n_sq; ++k) {
        coeff += obs.u_mat(a, k) * n_mat(j, k) +
                 std::conj(obs.u_mat(a, k)) * std::conj(m_mat(j, k));
      }
      out[a] += model.r_ops[j] * coeff;
    }
  }
  return out;
}

std::vector<Matrix> raise_obs_index(const noise::CorrelationMatrix& corr,
                                    const std::vector<Matrix>& ops) {
  require(corr.size() == static_cast<Eigen::Index>(ops.size()),
          ErrorCode::dimension,
          "correlation matrix size must match the operator count");
  std::vector<Matrix> out(ops.size());
  for (std::size_t a = 0; a < ops.size(); ++a) {
    Matrix acc = Matrix::Zero(ops[a].rows(), ops[a].cols());
    for (std::size_t b = 0; b < ops.size(); ++b) {
      acc += corr.k_inv(static_cast<Eigen::Index>(a),
                        static_cast<Eigen::Index>(b)) *
             ops[b];
    }
    out[a] = std::move(acc);
  }
  return out;
}

BuiltScenario cavity_mixed_model(const CavityMixedParams& params) {
  require(params.dim >= 2, ErrorCode::dimension,
          "cavity dimension must be at least 2");
  require(params.kappa > 0.0, ErrorCode::invalid_argument,
          "kappa must be positive");

  const Eigen::Index d = params.dim;
  const Matrix a = hilbert::annihilator(d);

  BuiltScenario sc;
  sc.model.dim = d;
  sc.model.n_fock = 1;
  sc.model.n_sq = 1;
  sc.model.s_mat = std::exp(Complex(0.0, params.phi)) * Matrix::Identity(d, d);
  sc.model.l_ops = {std::sqrt(params.kappa) * a};
  sc.model.r_ops = {Matrix::Zero(d, d)};
  sc.model.h_op = params.omega * (a.adjoint() * a);
  sc.model.squeeze = noise::SqueezingSpec::scalar(params.squeeze);

  // Two balanced-beamsplitter quadratures of the mixed output:
  //   Y_1 = (B_out + A_out)/sqrt(2) + H.c.  ->  T = 1/sqrt(2),  U = 1/sqrt(2)
  //   Y_2 = (B_out - A_out)/(sqrt(2) i) + H.c. -> T = -i/sqrt(2), U = +i/sqrt(2)
  const double inv_rt2 = 1.0 / std::sqrt(2.0);
  sc.obs.t_mat = Matrix(2, 1);
  sc.obs.u_mat = Matrix(2, 1);
  sc.obs.t_mat << Complex(inv_rt2, 0.0), Complex(0.0, -inv_rt2);
  sc.obs.u_mat << Complex(inv_rt2, 0.0), Complex(0.0, inv_rt2);

  Vector alpha0(1), beta0(1);
  alpha0 << params.alpha0;
  beta0 << params.beta0;
  sc.means = InputMeans::constants(alpha0, beta0);

  validate_model(sc.model);
  validate_observations(sc.obs, sc.model);
  return sc;
}

BuiltScenario cavity_direct_model(const CavityDirectParams& params) {
  require(params.dim >= 2, ErrorCode::dimension,
          "cavity dimension must be at least 2");
  require(params.gamma > 0.0, ErrorCode::invalid_argument,
          "gamma must be positive");

  const Eigen::Index d = params.dim;
  const Matrix a = hilbert::annihilator(d);

  BuiltScenario sc;
  sc.model.dim = d;
  sc.model.n_fock = 0;
  sc.model.n_sq = 1;
  sc.model.s_mat = Matrix::Zero(0, 0);
  sc.model.l_ops = {};
  sc.model.r_ops = {std::sqrt(params.gamma) * a};
  sc.model.h_op = params.omega * (a.adjoint() * a);
  sc.model.squeeze = noise::SqueezingSpec::scalar(params.squeeze);

  // Homodyne on the squeezed output at quadrature phase theta: the detector
  // measures e^{-i theta} A_out + e^{i theta} A_out†, and the coefficient
  // entering the filter gains for that quadrature is the conjugate phase.
  sc.obs.t_mat = Matrix(1, 0);
  sc.obs.u_mat = Matrix(1, 1);
  sc.obs.u_mat << std::exp(Complex(0.0, params.theta));

  Vector alpha0(1);
  alpha0 << params.alpha0;
  sc.means = InputMeans::constants(alpha0, Vector(0));

  validate_model(sc.model);
  validate_observations(sc.obs, sc.model);
  return sc;
}

}  // namespace sqf::models
