#include <doctest.h>

#include <cmath>
#include <complex>
#include <sstream>

#include "homsim/spdc.hpp"

using namespace homsim;

namespace {

// FWHM of a sampled, single-peaked curve by linear interpolation.
double sampled_fwhm(const std::vector<double>& x, const std::vector<double>& y) {
  std::size_t peak = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[peak]) peak = i;
  const double half = 0.5 * y[peak];
  std::size_t l = peak, r = peak;
  while (l > 0 && y[l - 1] >= half) --l;
  while (r + 1 < y.size() && y[r + 1] >= half) ++r;
  const double xl = x[l - 1] + (half - y[l - 1]) * (x[l] - x[l - 1]) / (y[l] - y[l - 1]);
  const double xr = x[r] + (half - y[r]) * (x[r + 1] - x[r]) / (y[r + 1] - y[r]);
  return xr - xl;
}

}  // namespace

TEST_CASE("frequency grid geometry") {
  const FrequencyGrid g(100.0, 10.0, 11);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g.point(0) == doctest::Approx(95.0));
  CHECK(g.point(10) == doctest::Approx(105.0));
  CHECK(g.offsets()[5] == doctest::Approx(0.0));
  CHECK(g.offsets()[0] == doctest::Approx(-5.0));

  CHECK_THROWS_AS(FrequencyGrid(100.0, 10.0, 1), InvalidSpec);
  CHECK_THROWS_AS(FrequencyGrid(100.0, -1.0, 10), InvalidSpec);
  CHECK_THROWS_AS(FrequencyGrid(1.0, 10.0, 10), InvalidSpec);
  CHECK_THROWS_AS(FrequencyGrid::around_wavelength(-1.0, 10.0, 10), InvalidSpec);
}

TEST_CASE("grid around a wavelength spans the requested nm") {
  const auto g = FrequencyGrid::around_wavelength(1584.0, 30.0, 256);
  CHECK(g.center_wavelength_nm() == doctest::Approx(1584.0));
  const double lo = units::omega_to_wavelength_nm(g.point(255));
  const double hi = units::omega_to_wavelength_nm(g.point(0));
  CHECK(hi - lo == doctest::Approx(30.0).epsilon(1e-3));
}

TEST_CASE("delay limit is the grid Nyquist bound") {
  const FrequencyGrid g(2e15, 2e13, 101);  // spacing 2e11 rad/s
  const double limit_ps = std::numbers::pi / g.spacing() * 1e12;
  CHECK(g.admits_delay(0.99 * limit_ps));
  CHECK_FALSE(g.admits_delay(1.01 * limit_ps));
  CHECK_FALSE(g.admits_delay(-1.01 * limit_ps));
  CHECK_THROWS_AS(g.check_delay(2.0 * limit_ps), InvalidSpec);
}

TEST_CASE("pump spectral width agrees with a numerical Fourier transform") {
  PumpSpec pump;  // 2 ps intensity FWHM
  CHECK(pump.frequency_fwhm_hz() == doctest::Approx(0.2206e12).epsilon(1e-3));

  // Oracle: transform-limited field with intensity FWHM T, transformed by a
  // direct Riemann sum; spectral intensity FWHM measured on the result.
  const double T = pump.duration_fwhm_ps * 1e-12;
  const int nt = 2001;
  const double dt = 8.0 * T / (nt - 1);
  std::vector<double> nu, intensity;
  for (int k = -300; k <= 300; ++k) {
    const double f = k * 1e9;  // Hz
    std::complex<double> acc = 0.0;
    for (int i = 0; i < nt; ++i) {
      const double t = -4.0 * T + i * dt;
      const double field = std::exp(-2.0 * std::numbers::ln2 * t * t / (T * T));
      acc += field * std::polar(1.0, -2.0 * std::numbers::pi * f * t) * dt;
    }
    nu.push_back(f);
    intensity.push_back(std::norm(acc));
  }
  const double oracle = sampled_fwhm(nu, intensity);
  CHECK(pump.frequency_fwhm_hz() == doctest::Approx(oracle).epsilon(1e-3));

  // The envelope used in the JSA has the same width.
  std::vector<double> w, env;
  for (int k = -300; k <= 300; ++k) {
    const double d = 2.0 * std::numbers::pi * k * 1e9;
    w.push_back(d / (2.0 * std::numbers::pi));
    env.push_back(std::norm(build_pump_envelope(pump, pump.center_omega() + d)));
  }
  CHECK(sampled_fwhm(w, env) == doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("pump validation") {
  PumpSpec p;
  p.duration_fwhm_ps = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidSpec);
  p.duration_fwhm_ps = 2.0;
  p.center_wavelength_nm = -5.0;
  CHECK_THROWS_AS(p.validate(), InvalidSpec);
}

TEST_CASE("phase matching") {
  CrystalSpec c;
  CHECK(phase_matching(c, 0.0, 0.0) == 1.0);

  // sinc zero where the mismatch phase equals pi.
  const double ds = (c.inverse_group_velocity_signal - c.inverse_group_velocity_pump) * 1e-9;
  const double zero = 2.0 * std::numbers::pi / (ds * c.length_mm * 1e-3);
  CHECK(std::abs(phase_matching(c, zero, 0.0)) < 1e-12);

  SUBCASE("gaussian approximation shares the sinc^2 half-intensity width") {
    CrystalSpec g = c;
    g.phase_matching = PhaseMatching::gaussian_approx;
    std::vector<double> x, ysinc, ygauss;
    for (int k = -4000; k <= 4000; ++k) {
      const double d = k * zero / 2000.0;
      x.push_back(d);
      ysinc.push_back(std::pow(phase_matching(c, d, 0.0), 2));
      ygauss.push_back(std::pow(phase_matching(g, d, 0.0), 2));
    }
    CHECK(sampled_fwhm(x, ygauss) == doctest::Approx(sampled_fwhm(x, ysinc)).epsilon(1e-4));
  }

  SUBCASE("no group-velocity mismatch means no spectral filtering") {
    CrystalSpec flat = c;
    flat.inverse_group_velocity_signal = flat.inverse_group_velocity_pump;
    flat.inverse_group_velocity_idler = flat.inverse_group_velocity_pump;
    CHECK(phase_matching(flat, 3e12, -7e12) == 1.0);
  }
}

TEST_CASE("JSA is normalized and its kernels are consistent") {
  const auto jsa = SourceDefaults::jsa(96);
  CHECK(jsa.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_NOTHROW(jsa.require_normalized());

  const auto rho = reduced_kernel(jsa, Axis::idler);
  CHECK(rho.trace() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((rho.kernel - rho.kernel.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * rho.kernel.cwiseAbs().maxCoeff());

  // Purity from the idler side equals purity from the signal side.
  const auto rho_i = reduced_kernel(jsa, Axis::signal);
  CHECK(rho_i.purity() == doctest::Approx(rho.purity()).epsilon(1e-12));

  const RealVector marg = marginal_spectrum(jsa, Axis::signal);
  CHECK(marg.sum() * jsa.grid_signal().spacing() == doctest::Approx(1.0));
  CHECK(marg.minCoeff() >= 0.0);
  // Marginal equals the kernel diagonal.
  CHECK((marg - rho.kernel.diagonal().real()).cwiseAbs().maxCoeff() < 1e-9 * marg.maxCoeff());
}

TEST_CASE("JSA rejects bad input") {
  const FrequencyGrid g(2e15, 1e13, 4);
  CHECK_THROWS_AS(JointSpectralAmplitude(g, g, ComplexMatrix::Zero(3, 4), true), InvalidSpec);
  CHECK_THROWS_AS(JointSpectralAmplitude(g, g, ComplexMatrix::Zero(4, 4), true), NumericalFailure);
  ComplexMatrix bad = ComplexMatrix::Ones(4, 4);
  bad(1, 2) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(JointSpectralAmplitude(g, g, bad, true), InvalidSpec);

  const JointSpectralAmplitude raw(g, g, ComplexMatrix::Ones(4, 4), false);
  CHECK_THROWS_AS(raw.require_normalized(), InvalidSpec);
  CHECK_THROWS_AS(reduced_kernel(raw, Axis::idler), InvalidSpec);
}

TEST_CASE("swapping exchanges the photon roles") {
  const auto a = FrequencyGrid::around_wavelength(1580.0, 10.0, 8);
  const auto b = FrequencyGrid::around_wavelength(1590.0, 12.0, 5);
  const auto jsa = build_jsa(PumpSpec{}, CrystalSpec{}, a, b);
  const auto s = jsa.swapped();
  CHECK(s.grid_signal() == b);
  CHECK(s.grid_idler() == a);
  CHECK(s.amplitude().isApprox(jsa.amplitude().transpose()));
  CHECK(reduced_kernel(s, Axis::idler).purity() ==
        doctest::Approx(reduced_kernel(jsa, Axis::signal).purity()));
}

TEST_CASE("JSA CSV layout") {
  const FrequencyGrid g(2e15, 1e13, 2);
  const JointSpectralAmplitude jsa(g, g, ComplexMatrix::Constant(2, 2, cdouble(1.0, -1.0)), false);
  std::ostringstream out;
  write_jsa_csv(out, jsa);
  const std::string text = out.str();
  CHECK(text.rfind("omega_s,omega_i,re,im\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}
