#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace homsim {

using cdouble = std::complex<double>;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

namespace units {
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPico = 1e-12;
inline constexpr double kNano = 1e-9;

/// Vacuum wavelength in nm -> angular frequency in rad/s.
inline double wavelength_nm_to_omega(double wavelength_nm) {
  return 2.0 * std::numbers::pi * kSpeedOfLight / (wavelength_nm * kNano);
}

inline double omega_to_wavelength_nm(double omega) {
  return 2.0 * std::numbers::pi * kSpeedOfLight / omega / kNano;
}

/// |d omega / d lambda| at the given wavelength, in (rad/s) per nm.
inline double omega_per_nm(double wavelength_nm) {
  const double lambda = wavelength_nm * kNano;
  return 2.0 * std::numbers::pi * kSpeedOfLight / (lambda * lambda) * kNano;
}
}  // namespace units

/// Base of every error the library raises. The CLI maps the subclasses to
/// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or inputs that violate a documented precondition.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// A computation produced something non-physical or failed to converge.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace homsim
