#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sqf {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Error taxonomy shared by the C++ core and the C API status codes.
enum class ErrorCode {
  invalid_argument,
  parse,
  physicality,
  dimension,
  noncommuting_observations,
  singular_noise,
  step_size,
  leakage,
  io,
  unsupported,
  internal,
};

// All failures in the core are reported through this exception type; the
// C API boundary maps `code` onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

// Expectation value tr(rho * x) without forming the matrix product:
// tr(rho x) = sum_{ij} rho_ij x_ji.
inline Complex expectation(const Matrix& rho, const Matrix& x) {
  return (rho.transpose().array() * x.array()).sum();
}

inline double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace sqf
