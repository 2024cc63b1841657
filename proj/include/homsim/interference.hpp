#pragma once

// Hong-Ou-Mandel dips and correlated spectral intensity (CSI) maps for
// heralded (four-fold), thermal (two-fold) and twin-photon configurations.
//
// The four-fold and thermal quantities are evaluated through the signal
// reduced kernels rho(w, w'): after expanding the modulus square, every
// idler integral collapses into a kernel element, so each delay costs O(N^2)
// instead of the O(N^4) direct quadrature.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "homsim/spdc.hpp"

namespace homsim {

/// Strictly increasing delays in ps.
struct DelayScan {
  std::vector<double> delays_ps;

  explicit DelayScan(std::vector<double> delays);
  static DelayScan linspace(double first_ps, double last_ps, std::size_t n);
};

enum class DipMode { fourfold, thermal, twin };

struct DipCurve {
  std::vector<double> delays_ps;
  std::vector<double> probability;
  DipMode mode = DipMode::fourfold;
  /// Non-oscillatory limit P(|tau| -> infinity), when known analytically.
  std::optional<double> asymptote;
};

/// Intensity over (axis1, axis2) beam-splitter output frequencies.
struct CsiMap {
  FrequencyGrid axis1;
  FrequencyGrid axis2;
  RealMatrix intensity;
  double tau_ps = 0.0;
  /// Entries below zero by floating-point residue that were clamped to 0.
  std::size_t clamped = 0;

  /// sum intensity dw1 dw2
  double total() const;
};

/// Integrated thermal-interference terms for identical sources.
struct ThermalKernels {
  double A = 0.0;  // background amplitude term, 2 for a normalized source
  double E = 0.0;  // exchange term at zero delay, 2 Tr(rho^2)
  /// Exchange term E(tau) at each requested delay.
  std::vector<double> E_tau;
};

DipCurve fourfold_dip(const JointSpectralAmplitude& jsa1,
                      const JointSpectralAmplitude& jsa2, const DelayScan& scan);

/// P_4 at one delay.
double fourfold_probability(const JointSpectralAmplitude& jsa1,
                            const JointSpectralAmplitude& jsa2, double tau_ps);

CsiMap fourfold_csi(const JointSpectralAmplitude& jsa1,
                    const JointSpectralAmplitude& jsa2, double tau_ps);

struct ThermalDip {
  DipCurve curve;
  ThermalKernels kernels;
};

ThermalDip thermal_dip(const JointSpectralAmplitude& jsa, const DelayScan& scan);
CsiMap thermal_csi(const JointSpectralAmplitude& jsa, double tau_ps);

DipCurve twin_dip(const JointSpectralAmplitude& jsa, const DelayScan& scan);
CsiMap twin_csi(const JointSpectralAmplitude& jsa, double tau_ps);

/// CSI with the delay-dependent interference term dropped (|tau| -> infinity).
CsiMap fourfold_csi_background(const JointSpectralAmplitude& jsa1,
                               const JointSpectralAmplitude& jsa2);
CsiMap thermal_csi_background(const JointSpectralAmplitude& jsa);
CsiMap twin_csi_background(const JointSpectralAmplitude& jsa);

/// V = (P_inf - min P) / P_inf. P_inf is the curve's asymptote when present;
/// otherwise the mean of the two end samples, which must both lie at least
/// five FWHM from the minimum.
double visibility(const DipCurve& curve);

/// Full width at half depth, linearly interpolated between samples (ps).
double fwhm(const DipCurve& curve);

/// Four-fold visibility with P_inf taken analytically and the minimum found
/// over delays (tau = 0 is exact for identical sources).
double fourfold_visibility(const JointSpectralAmplitude& jsa1,
                           const JointSpectralAmplitude& jsa2);

/// Samples of the map along its antidiagonal, interleaving the two central
/// antidiagonals so that consecutive samples differ by one grid step in
/// w1 - w2. Index d runs over w1 - w2 = (d - (N - 1)) * spacing.
struct AntidiagonalProfile {
  RealVector values;
  double step = 0.0;  // rad/s between samples
};
AntidiagonalProfile antidiagonal_profile(const CsiMap& map);
/// Profile of map - background. The delay-independent envelope otherwise
/// dominates the low-frequency end of the spectrum.
AntidiagonalProfile antidiagonal_profile(const CsiMap& map, const CsiMap& background);

/// |DFT| of the mean-removed profile. Bin b corresponds to b / (n * step)
/// cycles per (rad/s), i.e. a fringe cos(tau * dw) peaks at b = tau n step / 2pi.
RealVector fringe_spectrum(const AntidiagonalProfile& profile);

/// Bin index of the fringe_spectrum maximum, skipping bin 0.
std::size_t dominant_fringe_bin(const AntidiagonalProfile& profile);

/// Header `tau_ps,probability`.
void write_dip_csv(std::ostream& out, const DipCurve& curve);
/// Header `lambda1_nm,lambda2_nm,intensity`, row-major over (axis1, axis2).
void write_csi_csv(std::ostream& out, const CsiMap& map);

const char* to_string(DipMode mode);

}  // namespace homsim
