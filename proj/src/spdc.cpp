#include "homsim/spdc.hpp"

#include "homsim/csv.hpp"

#include <cmath>
#include <ostream>
#include <string>

namespace homsim {

namespace {

// Half-maximum point of sinc^2: sinc(x)^2 = 1/2.
constexpr double kSincHalfIntensity = 1.3915573782515103;

}  // namespace

FrequencyGrid::FrequencyGrid(double center, double span, std::size_t n_points)
    : center_(center), span_(span), n_points_(n_points) {
  if (n_points < 2) throw InvalidSpec("FrequencyGrid: n_points must be >= 2");
  if (!std::isfinite(center) || !std::isfinite(span) || span <= 0.0)
    throw InvalidSpec("FrequencyGrid: span must be finite and positive");
  if (center - 0.5 * span <= 0.0)
    throw InvalidSpec("FrequencyGrid: grid reaches non-positive frequency");
}

FrequencyGrid FrequencyGrid::around_wavelength(double center_nm, double span_nm,
                                               std::size_t n_points) {
  if (!(center_nm > 0.0) || !(span_nm > 0.0))
    throw InvalidSpec("FrequencyGrid: wavelengths must be positive");
  return {units::wavelength_nm_to_omega(center_nm),
          span_nm * units::omega_per_nm(center_nm), n_points};
}

RealVector FrequencyGrid::points() const {
  RealVector p(static_cast<Eigen::Index>(n_points_));
  for (std::size_t k = 0; k < n_points_; ++k) p[k] = point(k);
  return p;
}

RealVector FrequencyGrid::offsets() const {
  RealVector p(static_cast<Eigen::Index>(n_points_));
  const double step = spacing();
  for (std::size_t k = 0; k < n_points_; ++k)
    p[k] = (static_cast<double>(k) - 0.5 * static_cast<double>(n_points_ - 1)) * step;
  return p;
}

bool FrequencyGrid::admits_delay(double tau_ps) const {
  return std::isfinite(tau_ps) &&
         spacing() * std::abs(tau_ps) * units::kPico < std::numbers::pi;
}

void FrequencyGrid::check_delay(double tau_ps) const {
  if (!admits_delay(tau_ps))
    throw InvalidSpec("delay " + std::to_string(tau_ps) +
                      " ps violates the grid Nyquist limit (spacing*|tau| < pi)");
}

void PumpSpec::validate() const {
  if (!(duration_fwhm_ps > 0.0) || !std::isfinite(duration_fwhm_ps))
    throw InvalidSpec("pump: duration_fwhm must be positive");
  if (!(center_wavelength_nm > 0.0) || !std::isfinite(center_wavelength_nm))
    throw InvalidSpec("pump: center_wavelength must be positive");
}

double PumpSpec::center_omega() const {
  return units::wavelength_nm_to_omega(center_wavelength_nm);
}

double PumpSpec::sigma_omega() const {
  return std::sqrt(2.0 * std::numbers::ln2) / (duration_fwhm_ps * units::kPico);
}

double PumpSpec::frequency_fwhm_hz() const {
  // Intensity exp(-d^2 / (2 sigma^2)) has FWHM 2 sigma sqrt(2 ln 2).
  return 2.0 * sigma_omega() * std::sqrt(2.0 * std::numbers::ln2) /
         (2.0 * std::numbers::pi);
}

void CrystalSpec::validate() const {
  if (!(length_mm > 0.0) || !std::isfinite(length_mm))
    throw InvalidSpec("crystal: length must be positive");
  if (!std::isfinite(inverse_group_velocity_pump) ||
      !std::isfinite(inverse_group_velocity_signal) ||
      !std::isfinite(inverse_group_velocity_idler))
    throw InvalidSpec("crystal: inverse group velocities must be finite");
}

JointSpectralAmplitude::JointSpectralAmplitude(FrequencyGrid signal,
                                               FrequencyGrid idler,
                                               ComplexMatrix amplitude,
                                               bool normalize)
    : signal_(signal), idler_(idler), amplitude_(std::move(amplitude)),
      normalized_(normalize) {
  if (static_cast<std::size_t>(amplitude_.rows()) != signal_.size() ||
      static_cast<std::size_t>(amplitude_.cols()) != idler_.size())
    throw InvalidSpec("JSA: amplitude shape does not match grids");
  if (!amplitude_.allFinite()) throw InvalidSpec("JSA: non-finite amplitude");
  if (normalize) {
    const double n2 = norm_squared();
    if (!(n2 > 0.0)) throw NumericalFailure("JSA: zero amplitude cannot be normalized");
    amplitude_ /= std::sqrt(n2);
  }
}

double JointSpectralAmplitude::norm_squared() const {
  return amplitude_.squaredNorm() * signal_.spacing() * idler_.spacing();
}

JointSpectralAmplitude JointSpectralAmplitude::swapped() const {
  JointSpectralAmplitude out = *this;
  out.signal_ = idler_;
  out.idler_ = signal_;
  out.amplitude_ = amplitude_.transpose();
  return out;
}

void JointSpectralAmplitude::require_normalized() const {
  if (!normalized_ || std::abs(norm_squared() - 1.0) > 1e-9)
    throw InvalidSpec("JSA must be normalized");
}

double SpectralKernel::trace() const {
  return kernel.diagonal().real().sum() * grid.spacing();
}

double SpectralKernel::purity() const {
  const double dw = grid.spacing();
  // rho is Hermitian, so rho_jk rho_kj = |rho_jk|^2.
  return kernel.cwiseProduct(kernel.transpose()).sum().real() * dw * dw;
}

cdouble build_pump_envelope(const PumpSpec& pump, double nu) {
  pump.validate();
  const double d = nu - pump.center_omega();
  const double s = pump.sigma_omega();
  return {std::exp(-d * d / (4.0 * s * s)), 0.0};
}

double phase_matching(const CrystalSpec& crystal, double detune_signal,
                      double detune_idler) {
  // ps/mm -> s/m is a factor 1e-9; length mm -> m is 1e-3.
  const double ds = (crystal.inverse_group_velocity_signal -
                     crystal.inverse_group_velocity_pump) * 1e-9;
  const double di = (crystal.inverse_group_velocity_idler -
                     crystal.inverse_group_velocity_pump) * 1e-9;
  const double x = 0.5 * (detune_signal * ds + detune_idler * di) *
                   crystal.length_mm * 1e-3;
  switch (crystal.phase_matching) {
    case PhaseMatching::sinc:
      return x == 0.0 ? 1.0 : std::sin(x) / x;
    case PhaseMatching::gaussian_approx: {
      // Same intensity FWHM as sinc^2.
      const double gamma = std::numbers::ln2 /
                           (2.0 * kSincHalfIntensity * kSincHalfIntensity);
      return std::exp(-gamma * x * x);
    }
  }
  return 0.0;
}

JointSpectralAmplitude build_jsa(const PumpSpec& pump, const CrystalSpec& crystal,
                                 const FrequencyGrid& grid_signal,
                                 const FrequencyGrid& grid_idler) {
  pump.validate();
  crystal.validate();
  const double degenerate = 0.5 * pump.center_omega();
  const RealVector ws = grid_signal.points();
  const RealVector wi = grid_idler.points();

  ComplexMatrix amp(ws.size(), wi.size());
  for (Eigen::Index k = 0; k < wi.size(); ++k) {
    for (Eigen::Index j = 0; j < ws.size(); ++j) {
      amp(j, k) = build_pump_envelope(pump, ws[j] + wi[k]) *
                  phase_matching(crystal, ws[j] - degenerate, wi[k] - degenerate);
    }
  }
  return {grid_signal, grid_idler, std::move(amp), true};
}

SpectralKernel reduced_kernel(const JointSpectralAmplitude& jsa, Axis trace_out) {
  jsa.require_normalized();
  const ComplexMatrix& f = jsa.amplitude();
  if (trace_out == Axis::idler) {
    ComplexMatrix rho = f * f.adjoint() * jsa.grid_idler().spacing();
    return {jsa.grid_signal(), std::move(rho)};
  }
  ComplexMatrix rho = f.transpose() * f.conjugate() * jsa.grid_signal().spacing();
  return {jsa.grid_idler(), std::move(rho)};
}

RealVector marginal_spectrum(const JointSpectralAmplitude& jsa, Axis which) {
  jsa.require_normalized();
  const ComplexMatrix& f = jsa.amplitude();
  if (which == Axis::signal)
    return f.cwiseAbs2().rowwise().sum() * jsa.grid_idler().spacing();
  return f.cwiseAbs2().colwise().sum().transpose() * jsa.grid_signal().spacing();
}

void write_jsa_csv(std::ostream& out, const JointSpectralAmplitude& jsa) {
  out << "omega_s,omega_i,re,im\n";
  const RealVector ws = jsa.grid_signal().points();
  const RealVector wi = jsa.grid_idler().points();
  std::string line;
  for (Eigen::Index j = 0; j < ws.size(); ++j) {
    for (Eigen::Index k = 0; k < wi.size(); ++k) {
      line.clear();
      csv::append_number(line, ws[j]);
      line += ',';
      csv::append_number(line, wi[k]);
      line += ',';
      csv::append_number(line, jsa.amplitude()(j, k).real());
      line += ',';
      csv::append_number(line, jsa.amplitude()(j, k).imag());
      line += '\n';
      out << line;
    }
  }
}

FrequencyGrid SourceDefaults::grid(std::size_t n_points) {
  return FrequencyGrid::around_wavelength(kDegenerateWavelengthNm, kGridSpanNm,
                                          n_points);
}

JointSpectralAmplitude SourceDefaults::jsa(std::size_t n_points) {
  const FrequencyGrid g = grid(n_points);
  return build_jsa(PumpSpec{}, CrystalSpec{}, g, g);
}

}  // namespace homsim
