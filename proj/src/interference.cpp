#include "homsim/interference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <unsupported/Eigen/FFT>

#include "homsim/csv.hpp"
#include "homsim/parallel.hpp"

namespace homsim {

namespace {

constexpr double kClampFloor = 1e-12;

double tau_seconds(double tau_ps) { return tau_ps * units::kPico; }

// v_k = exp(-i tau x_k), so v^H M v = sum_jk M_jk exp(-i tau (x_k - x_j)).
ComplexVector phase_vector(const FrequencyGrid& grid, double tau_ps) {
  const RealVector x = grid.offsets();
  const double tau = tau_seconds(tau_ps);
  ComplexVector v(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) v[k] = std::polar(1.0, -tau * x[k]);
  return v;
}

cdouble phased_sum(const ComplexMatrix& m, const ComplexVector& v) {
  return v.dot(m * v);  // dot conjugates its left argument
}

void require_same_signal_grid(const JointSpectralAmplitude& a,
                              const JointSpectralAmplitude& b) {
  if (!(a.grid_signal() == b.grid_signal()))
    throw InvalidSpec("interfering sources must share the signal grid");
}

// Kernel pair product M_jk = rho1(j,k) rho2(k,j).
struct KernelPair {
  SpectralKernel rho1;
  SpectralKernel rho2;
  ComplexMatrix product;

  KernelPair(const JointSpectralAmplitude& jsa1, const JointSpectralAmplitude& jsa2)
      : rho1(reduced_kernel(jsa1, Axis::idler)),
        rho2(reduced_kernel(jsa2, Axis::idler)),
        product(rho1.kernel.cwiseProduct(rho2.kernel.transpose())) {}

  double dw() const { return rho1.grid.spacing(); }
  double background() const { return 2.0 * rho1.trace() * rho2.trace(); }
  double exchange(double tau_ps) const {
    return phased_sum(product, phase_vector(rho1.grid, tau_ps)).real() * dw() * dw();
  }
};

void clamp_map(CsiMap& map) {
  const double scale = map.intensity.cwiseAbs().maxCoeff();
  const double floor = -kClampFloor * std::max(scale, std::numeric_limits<double>::min());
  for (Eigen::Index k = 0; k < map.intensity.cols(); ++k) {
    for (Eigen::Index j = 0; j < map.intensity.rows(); ++j) {
      double& v = map.intensity(j, k);
      if (v >= 0.0) continue;
      if (v < floor)
        throw NumericalFailure("CSI intensity significantly negative: " +
                               std::to_string(v / scale) + " of peak");
      v = 0.0;
      ++map.clamped;
    }
  }
}

// Shared body of the four-fold and thermal maps:
// diag_weight * rho1(a,a) rho2(b,b) + cross terms - 2 Re[M(a,b) e^{i tau (w_b - w_a)}].
CsiMap kernel_csi(const SpectralKernel& rho1, const SpectralKernel& rho2,
                  double tau_ps, bool with_phase, bool thermal) {
  const auto n = static_cast<Eigen::Index>(rho1.grid.size());
  const RealVector x = rho1.grid.offsets();
  const double tau = tau_seconds(tau_ps);
  const RealVector d1 = rho1.kernel.diagonal().real();
  const RealVector d2 = rho2.kernel.diagonal().real();

  CsiMap map{rho1.grid, rho1.grid, RealMatrix(n, n), tau_ps, 0};
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const auto a = static_cast<Eigen::Index>(row);
    for (Eigen::Index b = 0; b < n; ++b) {
      const cdouble m = rho1.kernel(a, b) * rho2.kernel(b, a);
      const double phase_term =
          with_phase ? (m * std::polar(1.0, tau * (x[a] - x[b]))).real() : 0.0;
      double value;
      if (thermal) {
        // 2A -> 4 rho(a,a) rho(b,b); E -> 2 rho(a,b) rho(b,a); E(tau) likewise phased.
        value = 4.0 * d1[a] * d2[b] + 2.0 * m.real() - 2.0 * phase_term;
      } else {
        value = d1[a] * d2[b] + d1[b] * d2[a] - 2.0 * phase_term;
      }
      map.intensity(a, b) = value;
    }
  });
  clamp_map(map);
  return map;
}

std::vector<double> evaluate(const DelayScan& scan,
                             const std::function<double(double)>& probability) {
  std::vector<double> out(scan.delays_ps.size());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = probability(scan.delays_ps[i]); });
  return out;
}

void check_scan(const FrequencyGrid& grid, const DelayScan& scan) {
  for (double t : scan.delays_ps) grid.check_delay(t);
}

struct DipShape {
  std::size_t min_index;
  double reference;
  double left;   // ps
  double right;  // ps
};

DipShape dip_shape(const DipCurve& curve, double reference) {
  const auto& p = curve.probability;
  const auto& t = curve.delays_ps;
  const auto it = std::min_element(p.begin(), p.end());
  const auto m = static_cast<std::size_t>(it - p.begin());
  if (m == 0 || m + 1 == p.size())
    throw InvalidSpec("dip minimum lies on the scan boundary");
  const double level = reference - 0.5 * (reference - p[m]);

  auto crossing = [&](std::size_t inner, std::size_t outer) {
    return t[inner] + (level - p[inner]) * (t[outer] - t[inner]) / (p[outer] - p[inner]);
  };

  std::size_t i = m;
  while (i > 0 && p[i - 1] < level) --i;
  if (i == 0) throw InvalidSpec("dip has no half-depth crossing before the minimum");
  const double left = crossing(i, i - 1);

  std::size_t k = m;
  while (k + 1 < p.size() && p[k + 1] < level) ++k;
  if (k + 1 == p.size())
    throw InvalidSpec("dip has no half-depth crossing after the minimum");
  const double right = crossing(k, k + 1);
  return {m, reference, left, right};
}

double curve_reference(const DipCurve& curve) {
  if (curve.probability.size() < 3)
    throw InvalidSpec("dip curve needs at least 3 points");
  if (curve.asymptote) return *curve.asymptote;

  const auto& p = curve.probability;
  const auto& t = curve.delays_ps;
  const double reference = 0.5 * (p.front() + p.back());
  const DipShape shape = dip_shape(curve, reference);
  const double width = shape.right - shape.left;
  const double tmin = t[shape.min_index];
  if (tmin - t.front() < 5.0 * width || t.back() - tmin < 5.0 * width)
    throw InvalidSpec("dip curve lacks a plateau (>= 5 FWHM each side) and no asymptote");
  return reference;
}

bool is_flat(const std::vector<double>& p) {
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  return *hi - *lo <= 1e-12 * std::max(std::abs(*hi), 1e-300);
}

}  // namespace

DelayScan::DelayScan(std::vector<double> delays) : delays_ps(std::move(delays)) {
  if (delays_ps.empty()) throw InvalidSpec("DelayScan: no delays");
  for (std::size_t i = 0; i < delays_ps.size(); ++i) {
    if (!std::isfinite(delays_ps[i])) throw InvalidSpec("DelayScan: non-finite delay");
    if (i > 0 && !(delays_ps[i] > delays_ps[i - 1]))
      throw InvalidSpec("DelayScan: delays must be strictly increasing");
  }
}

DelayScan DelayScan::linspace(double first_ps, double last_ps, std::size_t n) {
  if (n < 2) throw InvalidSpec("DelayScan::linspace needs n >= 2");
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i)
    d[i] = first_ps + (last_ps - first_ps) * static_cast<double>(i) /
                          static_cast<double>(n - 1);
  return DelayScan(std::move(d));
}

double CsiMap::total() const {
  return intensity.sum() * axis1.spacing() * axis2.spacing();
}

double fourfold_probability(const JointSpectralAmplitude& jsa1,
                            const JointSpectralAmplitude& jsa2, double tau_ps) {
  require_same_signal_grid(jsa1, jsa2);
  jsa1.grid_signal().check_delay(tau_ps);
  const KernelPair k(jsa1, jsa2);
  return 0.25 * (k.background() - 2.0 * k.exchange(tau_ps));
}

DipCurve fourfold_dip(const JointSpectralAmplitude& jsa1,
                      const JointSpectralAmplitude& jsa2, const DelayScan& scan) {
  require_same_signal_grid(jsa1, jsa2);
  check_scan(jsa1.grid_signal(), scan);
  const KernelPair k(jsa1, jsa2);
  const double background = k.background();
  DipCurve curve{scan.delays_ps, {}, DipMode::fourfold, 0.25 * background};
  curve.probability = evaluate(scan, [&](double tau) {
    return 0.25 * (background - 2.0 * k.exchange(tau));
  });
  return curve;
}

CsiMap fourfold_csi(const JointSpectralAmplitude& jsa1,
                    const JointSpectralAmplitude& jsa2, double tau_ps) {
  require_same_signal_grid(jsa1, jsa2);
  jsa1.grid_signal().check_delay(tau_ps);
  return kernel_csi(reduced_kernel(jsa1, Axis::idler), reduced_kernel(jsa2, Axis::idler),
                    tau_ps, true, false);
}

CsiMap fourfold_csi_background(const JointSpectralAmplitude& jsa1,
                               const JointSpectralAmplitude& jsa2) {
  require_same_signal_grid(jsa1, jsa2);
  CsiMap map = kernel_csi(reduced_kernel(jsa1, Axis::idler),
                          reduced_kernel(jsa2, Axis::idler), 0.0, false, false);
  map.tau_ps = std::numeric_limits<double>::infinity();
  return map;
}

ThermalDip thermal_dip(const JointSpectralAmplitude& jsa, const DelayScan& scan) {
  check_scan(jsa.grid_signal(), scan);
  const KernelPair k(jsa, jsa);
  ThermalKernels kernels;
  kernels.A = k.background();
  kernels.E = 2.0 * k.exchange(0.0);
  kernels.E_tau = evaluate(scan, [&](double tau) { return 2.0 * k.exchange(tau); });

  DipCurve curve{scan.delays_ps, {}, DipMode::thermal,
                 0.25 * (2.0 * kernels.A + kernels.E)};
  curve.probability.reserve(kernels.E_tau.size());
  for (double e_tau : kernels.E_tau)
    curve.probability.push_back(0.25 * (2.0 * kernels.A + kernels.E - e_tau));
  return {std::move(curve), std::move(kernels)};
}

CsiMap thermal_csi(const JointSpectralAmplitude& jsa, double tau_ps) {
  jsa.grid_signal().check_delay(tau_ps);
  const SpectralKernel rho = reduced_kernel(jsa, Axis::idler);
  return kernel_csi(rho, rho, tau_ps, true, true);
}

CsiMap thermal_csi_background(const JointSpectralAmplitude& jsa) {
  const SpectralKernel rho = reduced_kernel(jsa, Axis::idler);
  CsiMap map = kernel_csi(rho, rho, 0.0, false, true);
  map.tau_ps = std::numeric_limits<double>::infinity();
  return map;
}

namespace {

void require_common_axis(const JointSpectralAmplitude& jsa) {
  if (!(jsa.grid_signal() == jsa.grid_idler()))
    throw InvalidSpec("twin-photon interference needs identical signal and idler grids");
}

// |f(a,b) - f(b,a) e^{-i tau (w_a - w_b)}|^2
RealMatrix twin_intensity(const JointSpectralAmplitude& jsa, double tau_ps) {
  const ComplexMatrix& f = jsa.amplitude();
  const RealVector x = jsa.grid_signal().offsets();
  const double tau = tau_seconds(tau_ps);
  const Eigen::Index n = f.rows();
  RealMatrix out(n, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a)
      out(a, b) = std::norm(f(a, b) - f(b, a) * std::polar(1.0, -tau * (x[a] - x[b])));
  return out;
}

}  // namespace

DipCurve twin_dip(const JointSpectralAmplitude& jsa, const DelayScan& scan) {
  jsa.require_normalized();
  require_common_axis(jsa);
  check_scan(jsa.grid_signal(), scan);
  const double dw2 = jsa.grid_signal().spacing() * jsa.grid_idler().spacing();
  DipCurve curve{scan.delays_ps, {}, DipMode::twin, 0.5 * jsa.norm_squared()};
  curve.probability = evaluate(
      scan, [&](double tau) { return 0.25 * twin_intensity(jsa, tau).sum() * dw2; });
  return curve;
}

CsiMap twin_csi_background(const JointSpectralAmplitude& jsa) {
  jsa.require_normalized();
  require_common_axis(jsa);
  const RealMatrix p = jsa.amplitude().cwiseAbs2();
  return {jsa.grid_signal(), jsa.grid_idler(), p + p.transpose(),
          std::numeric_limits<double>::infinity(), 0};
}

CsiMap twin_csi(const JointSpectralAmplitude& jsa, double tau_ps) {
  jsa.require_normalized();
  require_common_axis(jsa);
  jsa.grid_signal().check_delay(tau_ps);
  return {jsa.grid_signal(), jsa.grid_idler(), twin_intensity(jsa, tau_ps), tau_ps, 0};
}

double visibility(const DipCurve& curve) {
  if (curve.probability.size() != curve.delays_ps.size())
    throw InvalidSpec("dip curve: delay/probability size mismatch");
  if (curve.probability.size() < 3) throw InvalidSpec("dip curve needs at least 3 points");
  if (is_flat(curve.probability)) {
    if (!curve.asymptote) return 0.0;
    const double ref = *curve.asymptote;
    return (ref - curve.probability.front()) / ref;
  }
  const double reference = curve_reference(curve);
  if (!(reference > 0.0)) throw NumericalFailure("dip reference level is not positive");
  const auto& p = curve.probability;
  const auto m = static_cast<std::size_t>(std::min_element(p.begin(), p.end()) - p.begin());
  if (m == 0 || m + 1 == p.size())
    throw InvalidSpec("dip minimum lies on the scan boundary");
  return (reference - p[m]) / reference;
}

double fwhm(const DipCurve& curve) {
  const DipShape shape = dip_shape(curve, curve_reference(curve));
  return shape.right - shape.left;
}

double fourfold_visibility(const JointSpectralAmplitude& jsa1,
                           const JointSpectralAmplitude& jsa2) {
  require_same_signal_grid(jsa1, jsa2);
  const KernelPair k(jsa1, jsa2);
  const double reference = 0.25 * k.background();
  auto prob = [&](double tau) { return 0.25 * (k.background() - 2.0 * k.exchange(tau)); };

  // Coarse scan inside the Nyquist range, then golden-section refinement.
  const double limit = 0.95 * std::numbers::pi / (k.dw() * units::kPico);
  constexpr std::size_t kCoarse = 801;
  const DelayScan scan = DelayScan::linspace(-limit, limit, kCoarse);
  const std::vector<double> coarse = evaluate(scan, prob);
  const auto best = static_cast<std::size_t>(
      std::min_element(coarse.begin(), coarse.end()) - coarse.begin());
  double lo = scan.delays_ps[best == 0 ? 0 : best - 1];
  double hi = scan.delays_ps[best + 1 == kCoarse ? best : best + 1];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = prob(c), fd = prob(d);
  for (int it = 0; it < 80; ++it) {
    if (fc < fd) {
      hi = d; d = c; fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = prob(c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = prob(d);
    }
  }
  const double minimum = std::min({fc, fd, prob(0.0), coarse[best]});
  return (reference - minimum) / reference;
}

AntidiagonalProfile antidiagonal_profile(const CsiMap& map) {
  const Eigen::Index n = map.intensity.rows();
  if (map.intensity.cols() != n || !(map.axis1 == map.axis2))
    throw InvalidSpec("antidiagonal profile needs a square map on identical axes");
  AntidiagonalProfile out{RealVector(2 * n - 1), map.axis1.spacing()};
  for (Eigen::Index d = 0; d < 2 * n - 1; ++d) {
    const Eigen::Index diff = d - (n - 1);  // j - k
    const Eigen::Index sum = ((n - 1 + diff) % 2 == 0) ? n - 1 : n;
    const Eigen::Index j = (sum + diff) / 2;
    const Eigen::Index k = (sum - diff) / 2;
    out.values[d] = (j >= 0 && j < n && k >= 0 && k < n) ? map.intensity(j, k) : 0.0;
  }
  return out;
}

AntidiagonalProfile antidiagonal_profile(const CsiMap& map, const CsiMap& background) {
  if (!(map.axis1 == background.axis1) || !(map.axis2 == background.axis2))
    throw InvalidSpec("map and background must share axes");
  CsiMap fringes = map;
  fringes.intensity -= background.intensity;
  return antidiagonal_profile(fringes);
}

RealVector fringe_spectrum(const AntidiagonalProfile& profile) {
  std::vector<double> samples(profile.values.data(),
                              profile.values.data() + profile.values.size());
  const double mean = profile.values.mean();
  for (double& s : samples) s -= mean;
  Eigen::FFT<double> fft;
  std::vector<cdouble> spectrum;
  fft.fwd(spectrum, samples);
  const std::size_t half = samples.size() / 2 + 1;
  RealVector mag(static_cast<Eigen::Index>(half));
  for (std::size_t b = 0; b < half; ++b) mag[static_cast<Eigen::Index>(b)] = std::abs(spectrum[b]);
  return mag;
}

std::size_t dominant_fringe_bin(const AntidiagonalProfile& profile) {
  const RealVector mag = fringe_spectrum(profile);
  Eigen::Index best = 0;
  mag.tail(mag.size() - 1).maxCoeff(&best);
  return static_cast<std::size_t>(best + 1);
}

const char* to_string(DipMode mode) {
  switch (mode) {
    case DipMode::fourfold: return "fourfold";
    case DipMode::thermal: return "thermal";
    case DipMode::twin: return "twin";
  }
  return "unknown";
}

void write_dip_csv(std::ostream& out, const DipCurve& curve) {
  out << "tau_ps,probability\n";
  for (std::size_t i = 0; i < curve.delays_ps.size(); ++i)
    out << csv::row({curve.delays_ps[i], curve.probability[i]});
}

void write_csi_csv(std::ostream& out, const CsiMap& map) {
  out << "lambda1_nm,lambda2_nm,intensity\n";
  const RealVector w1 = map.axis1.points();
  const RealVector w2 = map.axis2.points();
  for (Eigen::Index a = 0; a < w1.size(); ++a) {
    const double l1 = units::omega_to_wavelength_nm(w1[a]);
    for (Eigen::Index b = 0; b < w2.size(); ++b)
      out << csv::row({l1, units::omega_to_wavelength_nm(w2[b]), map.intensity(a, b)});
  }
}

}  // namespace homsim
