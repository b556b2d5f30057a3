#pragma once

#include <vector>

#include "common.hpp"
#include "noise.hpp"

namespace sqf::models {

inline constexpr double kUnitarityTol = 1e-10;
inline constexpr double kHermiticityTol = 1e-10;

// Deterministic input-mean schedule: constant or piecewise-constant complex
// vector of time. Piecewise values are right-continuous (value at knot k
// applies on [knot_k, knot_{k+1})).
class MeanSchedule {
 public:
  // Default: a constant schedule over zero channels.
  MeanSchedule() : knots_{0.0}, values_{Vector(0)} {}

  static MeanSchedule constant(Vector value);
  static MeanSchedule piecewise(std::vector<double> knots,
                                std::vector<Vector> values);

  const Vector& at(double t) const;
  // Index of the piece active at time t (0 for constant schedules); lets
  // callers cache work that only changes when the schedule value changes.
  std::size_t segment_index(double t) const;
  const Vector& value(std::size_t segment) const { return values_.at(segment); }
  Eigen::Index size() const { return size_; }

 private:
  Eigen::Index size_ = 0;
  std::vector<double> knots_;
  std::vector<Vector> values_;
};

struct InputMeans {
  MeanSchedule alpha;  // squeezed-channel means, length n_sq
  MeanSchedule beta;   // Fock-channel means, length n_fock

  static InputMeans constants(Vector alpha0, Vector beta0) {
    return {MeanSchedule::constant(std::move(alpha0)),
            MeanSchedule::constant(std::move(beta0))};
  }
};

// System model: Hamiltonian H, scattering S on the Fock channels, couplings
// L_k to the Fock channels and R_j to the squeezed channels, plus the
// squeezing parameters of the squeezed inputs. The scattering matrix is
// stored as one (n_fock*dim)-square matrix whose dim-square blocks are the
// operator entries S_{jk}; squeezed channels carry no scattering by
// construction.
struct SLHModel {
  Eigen::Index dim = 0;
  Eigen::Index n_fock = 0;
  Eigen::Index n_sq = 0;
  Matrix s_mat;                // (n_fock*dim) x (n_fock*dim)
  std::vector<Matrix> l_ops;   // n_fock entries, dim x dim
  std::vector<Matrix> r_ops;   // n_sq entries, dim x dim
  Matrix h_op;                 // dim x dim
  noise::SqueezingSpec squeeze;

  Matrix s_block(Eigen::Index j, Eigen::Index k) const {
    return s_mat.block(j * dim, k * dim, dim, dim);
  }
};

// Observation coefficients: row alpha of (t_mat, u_mat) defines the measured
// quadrature Y_alpha = T_{alpha k} B_out_k + U_{alpha j} A_out_j + H.c.
struct ObservationSpec {
  Matrix t_mat;  // n_obs x n_fock
  Matrix u_mat;  // n_obs x n_sq

  Eigen::Index n_obs() const { return t_mat.rows(); }
};

// Damping operators appearing in the unitarity requirement: the Fock-channel
// part K_B = (1/2) sum_k L_k† L_k and the squeezed-channel part K_A built
// from R, N, M.
struct KOperators {
  Matrix k_a;
  Matrix k_b;
};

void validate_model(const SLHModel& model);
void validate_observations(const ObservationSpec& obs, const SLHModel& model);

KOperators build_k_operators(const SLHModel& model);

// Effective observed-channel couplings at time t:
//   Ltilde_alpha = T_{alpha k}(L_k + (S beta)_k) + U_{alpha j}(R_j + alpha_j)
std::vector<Matrix> build_ltilde(const SLHModel& model, const InputMeans& means,
                                 const ObservationSpec& obs, double t);

// Squeezing-induced gain corrections:
//   Rtilde_alpha = sum_{jk} R_j (U_{alpha k} N_{jk} + U*_{alpha k} M*_{jk})
std::vector<Matrix> build_rtilde(const SLHModel& model,
                                 const ObservationSpec& obs);

// Contraction with the inverse correlation matrix: out_alpha = K^{alpha beta} ops_beta.
std::vector<Matrix> raise_obs_index(const noise::CorrelationMatrix& corr,
                                    const std::vector<Matrix>& ops);

// Cavity mode with Fock drive whose output is mixed on a 50-50 beamsplitter
// with a squeezed reference before two-quadrature detection:
//   S = e^{i phi}, L = sqrt(kappa) a, H = omega a†a, R = 0,
//   Y_1 = (B_out + A_out)/sqrt(2) + H.c.,  Y_2 = (B_out - A_out)/(sqrt(2) i) + H.c.
struct CavityMixedParams {
  Eigen::Index dim = 0;
  double kappa = 0.0;
  double omega = 0.0;
  double phi = 0.0;
  noise::ScalarSqueezing squeeze;
  Complex alpha0{0.0, 0.0};  // constant squeezed-channel mean
  Complex beta0{0.0, 0.0};   // constant Fock-channel mean
};

struct BuiltScenario {
  SLHModel model;
  ObservationSpec obs;
  InputMeans means;
};

BuiltScenario cavity_mixed_model(const CavityMixedParams& params);

// Cavity mode driven directly by a squeezed field, single homodyne detector
// measuring Y = e^{-i theta} A_out + e^{i theta} A_out†:
//   S = I (no Fock channel), L = 0, R = sqrt(gamma) a, H = omega a†a.
// The stored observation coefficient is the conjugate phase U_11 = e^{+i theta},
// which is the coefficient entering the filter gains for this quadrature.
struct CavityDirectParams {
  Eigen::Index dim = 0;
  double gamma = 0.0;
  double omega = 0.0;
  double theta = 0.0;
  noise::ScalarSqueezing squeeze;
  Complex alpha0{0.0, 0.0};
};

BuiltScenario cavity_direct_model(const CavityDirectParams& params);

}  // namespace sqf::models
