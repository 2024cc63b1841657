#pragma once

// Gaussian-state model of four-fold HOM interference with multi-pair
// emission, loss and threshold detectors.
//
// Conventions: quadratures interleaved (x1, p1, ..., xn, pn) and the vacuum
// covariance matrix is the identity. The no-click probability of a set of m
// modes of a zero-mean state is 2^m / sqrt(det(gamma_S + I)).

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "homsim/common.hpp"

namespace homsim {

class CovarianceMatrix {
 public:
  /// n-mode vacuum.
  explicit CovarianceMatrix(std::size_t modes);
  /// Validates shape and symmetry (1e-12).
  explicit CovarianceMatrix(RealMatrix matrix);

  std::size_t modes() const { return static_cast<std::size_t>(matrix_.rows() / 2); }
  const RealMatrix& matrix() const { return matrix_; }

  /// Minimum eigenvalue of gamma + i Omega; >= -tol means physical.
  double physicality_margin() const;
  bool is_physical(double tol = 1e-9) const;

  /// Rows/columns of the listed modes, in the given order.
  CovarianceMatrix submatrix(std::span<const std::size_t> modes) const;

  /// Block-diagonal tensor product.
  static CovarianceMatrix direct_sum(const CovarianceMatrix& a, const CovarianceMatrix& b);

 private:
  RealMatrix matrix_;
};

/// Two-mode squeezed vacuum (mode 0 signal, mode 1 idler).
CovarianceMatrix tmsv_cov(double r_eff);

/// Pure-loss channel gamma -> eta gamma + (1 - eta) I on each mode; one
/// efficiency per mode.
CovarianceMatrix apply_loss(const CovarianceMatrix& gamma, std::span<const double> eta_per_mode);

/// Beam splitter of intensity transmittance t between modes a and b:
/// a -> sqrt(t) a + sqrt(1-t) b, b -> -sqrt(1-t) a + sqrt(t) b.
CovarianceMatrix apply_beamsplitter(const CovarianceMatrix& gamma, std::size_t mode_a,
                                    std::size_t mode_b, double t);

struct MultipairConfig {
  double mean_photon_number = 0.114;
  double efficiency = 0.19;
  std::vector<double> schmidt_eigenvalues{0.9, 0.025, 0.025, 0.01, 0.009};
  double mode_match = 1.0;  // xi used for the overlapped (zero delay) state
  bool renormalize = true;

  void validate() const;
  /// Eigenvalues as used by the model (renormalized when requested).
  std::vector<double> effective_eigenvalues() const;
};

/// Detectors: 0 and 1 watch the two beam-splitter outputs, 2 and 3 the
/// heralding idlers.
inline constexpr std::size_t kDetectorCount = 4;

/// Per Schmidt mode, six optical modes: s1 (temporal mode A), i1, s2 (A),
/// i2, and the orthogonal temporal mode B on each beam-splitter port.
struct ModeLayout {
  static constexpr std::size_t kModes = 6;
  static constexpr std::size_t signal1 = 0, idler1 = 1, signal2 = 2, idler2 = 3,
                               port1_late = 4, port2_late = 5;
  /// Optical modes watched by each detector.
  static std::span<const std::size_t> detector_modes(std::size_t detector);
};

/// One covariance matrix per Schmidt mode. overlapped = true uses
/// xi = cfg.mode_match (zero delay); false uses xi = 0 (large delay).
std::vector<CovarianceMatrix> assemble_state(const MultipairConfig& cfg, bool overlapped);

/// Same, for an explicit mode-matching factor and squeezing parameters.
std::vector<CovarianceMatrix> assemble_state(std::span<const double> effective_r,
                                             double efficiency, double xi);

/// p(r) = 1 - prod_l cosh(r sqrt(lambda_l))^-2
double pair_probability(double r, std::span<const double> eigenvalues);

/// Inverts pair_probability by bisection on [0, 10].
double solve_r(double p, std::span<const double> eigenvalues);

/// Probability that none of the listed detectors clicks.
double no_click_probability(std::span<const CovarianceMatrix> state,
                            std::span<const std::size_t> detectors);

/// Probability that every listed detector clicks, by inclusion-exclusion
/// over all subsets of `detectors`.
double coincidence_probability(std::span<const CovarianceMatrix> state,
                               std::span<const std::size_t> detectors);

double fourfold_click_prob(std::span<const CovarianceMatrix> state);

struct MultipairReport {
  double nbar = 0.0;
  double eta = 0.0;
  double xi = 0.0;
  double p = 0.0;
  double r = 0.0;
  double P_mean = 0.0;
  double P_min = 0.0;
  double V = 0.0;
};

MultipairReport multipair_report(const MultipairConfig& cfg);
double multipair_visibility(const MultipairConfig& cfg);

/// Header `nbar,eta,xi,p,r,P_mean,P_min,V`.
void write_multipair_csv(std::ostream& out, std::span<const MultipairReport> rows);

}  // namespace homsim
