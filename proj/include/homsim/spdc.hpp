#pragma once

// Discretized joint spectral amplitudes of a pulsed SPDC source and the
// reduced single-photon spectral kernels derived from them.

#include <cstddef>
#include <iosfwd>

#include "homsim/common.hpp"

namespace homsim {

/// Uniform angular-frequency grid. point(k) = center - span/2 + k * spacing.
class FrequencyGrid {
 public:
  /// center and span in rad/s; n_points >= 2.
  FrequencyGrid(double center, double span, std::size_t n_points);

  /// Grid centered on a vacuum wavelength whose span corresponds to
  /// span_nm of wavelength, linearized at the center.
  static FrequencyGrid around_wavelength(double center_nm, double span_nm,
                                         std::size_t n_points);

  double center() const { return center_; }
  double span() const { return span_; }
  std::size_t size() const { return n_points_; }
  double spacing() const { return span_ / static_cast<double>(n_points_ - 1); }
  double point(std::size_t k) const {
    return center_ - 0.5 * span_ + static_cast<double>(k) * spacing();
  }
  RealVector points() const;
  /// Points relative to the center, which keeps phase factors well conditioned.
  RealVector offsets() const;
  double center_wavelength_nm() const {
    return units::omega_to_wavelength_nm(center_);
  }

  /// Throws InvalidSpec unless spacing * |tau| < pi (tau in ps).
  void check_delay(double tau_ps) const;
  bool admits_delay(double tau_ps) const;

  bool operator==(const FrequencyGrid& other) const = default;

 private:
  double center_;
  double span_;
  std::size_t n_points_;
};

enum class PulseShape { gaussian };

struct PumpSpec {
  double center_wavelength_nm = 792.0;
  double duration_fwhm_ps = 2.0;  // intensity FWHM, transform limited
  PulseShape shape = PulseShape::gaussian;

  void validate() const;
  double center_omega() const;
  /// sigma of the field envelope exp(-(nu - w0)^2 / (4 sigma^2)), rad/s.
  double sigma_omega() const;
  /// Spectral intensity FWHM in Hz (not rad/s).
  double frequency_fwhm_hz() const;
};

enum class PhaseMatching { sinc, gaussian_approx };

/// Linearized crystal model. Inverse group velocities are in ps/mm.
struct CrystalSpec {
  double length_mm = 30.0;
  double inverse_group_velocity_pump = 6.27;
  double inverse_group_velocity_signal = 6.27 - 0.1682;
  double inverse_group_velocity_idler = 6.27 + 0.0889;
  PhaseMatching phase_matching = PhaseMatching::sinc;

  void validate() const;
};

/// Complex amplitude f(w_s, w_i) sampled on [signal, idler] grids.
class JointSpectralAmplitude {
 public:
  JointSpectralAmplitude(FrequencyGrid signal, FrequencyGrid idler,
                         ComplexMatrix amplitude, bool normalize);

  const FrequencyGrid& grid_signal() const { return signal_; }
  const FrequencyGrid& grid_idler() const { return idler_; }
  const ComplexMatrix& amplitude() const { return amplitude_; }
  bool normalized() const { return normalized_; }

  /// sum |f|^2 dw_s dw_i
  double norm_squared() const;
  /// Same amplitude with signal and idler roles exchanged.
  JointSpectralAmplitude swapped() const;

  /// Throws InvalidSpec unless the amplitude is flagged and numerically
  /// normalized.
  void require_normalized() const;

 private:
  FrequencyGrid signal_;
  FrequencyGrid idler_;
  ComplexMatrix amplitude_;
  bool normalized_;
};

enum class Axis { signal, idler };

/// Reduced density kernel rho(w, w') on one photon's grid.
struct SpectralKernel {
  FrequencyGrid grid;
  ComplexMatrix kernel;

  /// sum_k rho(w_k, w_k) dw
  double trace() const;
  /// Tr(rho^2) = sum_{jk} rho_jk rho_kj dw^2
  double purity() const;
};

cdouble build_pump_envelope(const PumpSpec& pump, double nu);

/// Phase-matching function for the given detunings from degeneracy (rad/s).
double phase_matching(const CrystalSpec& crystal, double detune_signal,
                      double detune_idler);

JointSpectralAmplitude build_jsa(const PumpSpec& pump,
                                 const CrystalSpec& crystal,
                                 const FrequencyGrid& grid_signal,
                                 const FrequencyGrid& grid_idler);

/// trace_out names the photon that is integrated away.
SpectralKernel reduced_kernel(const JointSpectralAmplitude& jsa, Axis trace_out);

/// Single-photon spectrum of the photon named by `which`; integrates to 1.
RealVector marginal_spectrum(const JointSpectralAmplitude& jsa, Axis which);

/// Header `omega_s,omega_i,re,im`, one row per grid pair.
void write_jsa_csv(std::ostream& out, const JointSpectralAmplitude& jsa);

/// The 2 ps / 792 nm pump, 30 mm crystal and 30 nm x 256 point grids
/// centered at the 1584 nm degeneracy.
struct SourceDefaults {
  static constexpr double kDegenerateWavelengthNm = 1584.0;
  static constexpr double kGridSpanNm = 30.0;
  static constexpr std::size_t kGridPoints = 256;

  static FrequencyGrid grid(std::size_t n_points = kGridPoints);
  static JointSpectralAmplitude jsa(std::size_t n_points = kGridPoints);
};

}  // namespace homsim
