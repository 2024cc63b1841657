#include <doctest.h>

#include <sstream>

#include "homsim/spectrometer.hpp"

using namespace homsim;

namespace {

CsiMap uniform_map(std::size_t n, double span_nm) {
  const auto g = FrequencyGrid::around_wavelength(1584.0, span_nm, n);
  const auto nn = static_cast<Eigen::Index>(n);
  return {g, g, RealMatrix::Ones(nn, nn), 0.0, 0};
}

}  // namespace

TEST_CASE("dispersion constants") {
  const DispersionSpec spec;
  CHECK(spec.total_dispersion() == doctest::Approx(941.25));
  CHECK(resolution(spec) == doctest::Approx(0.1062).epsilon(0.005));
  CHECK(window_to_bandwidth(5.0, spec) == doctest::Approx(2.656).epsilon(1e-3));
  CHECK(window_to_bandwidth(2.0, spec) == doctest::Approx(1.0624).epsilon(1e-3));
  CHECK(window_to_bandwidth(1.0, spec) == doctest::Approx(0.5312).epsilon(1e-3));
  CHECK(window_to_bandwidth(1.0, spec, 1.0) == doctest::Approx(2.0 * 0.5312).epsilon(1e-3));
  CHECK_THROWS_AS(window_to_bandwidth(0.0, spec), InvalidSpec);
  CHECK_THROWS_AS(window_to_bandwidth(1.0, spec, 0.0), InvalidSpec);

  DispersionSpec zero = spec;
  zero.fiber_length_km = 0.0;
  CHECK_THROWS_AS(zero.validate(), InvalidSpec);
  DispersionSpec jitter = spec;
  jitter.jitter_fwhm_ps = -1.0;
  CHECK_THROWS_AS(resolution(jitter), InvalidSpec);
}

TEST_CASE("wavelength and time round trip") {
  const DispersionSpec spec;
  CHECK(wavelength_to_time(1584.0, spec) == 0.0);
  CHECK(wavelength_to_time(1585.0, spec) == doctest::Approx(941.25));
  for (double l : {1570.0, 1584.0, 1599.3})
    CHECK(time_to_wavelength(wavelength_to_time(l, spec), spec) == doctest::Approx(l).epsilon(1e-14));
}

TEST_CASE("smearing conserves intensity and is the identity without jitter") {
  const auto jsa = SourceDefaults::jsa(128);
  const CsiMap map = fourfold_csi(jsa, jsa, 3.0);
  DispersionSpec none;
  none.jitter_fwhm_ps = 0.0;
  CHECK(smear_csi(map, none).intensity == map.intensity);

  const CsiMap s = smear_csi(map, DispersionSpec{});
  CHECK(s.total() == doctest::Approx(map.total()).epsilon(1e-9));
  CHECK(s.intensity.minCoeff() >= -1e-6 * s.intensity.maxCoeff());

  // Counts are conserved and the interior of a uniform map stays uniform.
  const CsiMap u = smear_csi(uniform_map(64, 10.0), DispersionSpec{});
  CHECK(u.intensity.sum() == doctest::Approx(64.0 * 64.0).epsilon(1e-12));
  CHECK((u.intensity.block(16, 16, 32, 32).array() - 1.0).abs().maxCoeff() < 1e-3);
}

TEST_CASE("smearing attenuates a fringe by the Gaussian transfer function") {
  // I = 1 + cos(tau (w1 - w2)); per-axis Gaussian blur of width s multiplies
  // the fringe by exp(-tau^2 s^2).
  const auto g = FrequencyGrid::around_wavelength(1584.0, 30.0, 256);
  const DispersionSpec spec;
  const double s = resolution(spec) / (2.0 * std::sqrt(2.0 * std::numbers::ln2)) *
                   units::omega_per_nm(1584.0);
  for (double tau_ps : {5.0, 15.0, 25.0}) {
    const double tau = tau_ps * 1e-12;
    RealMatrix m(256, 256);
    for (int a = 0; a < 256; ++a)
      for (int b = 0; b < 256; ++b) m(a, b) = 1.0 + std::cos(tau * (a - b) * g.spacing());
    const CsiMap blurred = smear_csi(CsiMap{g, g, m, tau_ps, 0}, spec);
    // Interior cell, away from the edge renormalization.
    const double centre = blurred.intensity(128, 128) - 1.0;
    CHECK(centre == doctest::Approx(std::exp(-tau * tau * s * s)).epsilon(1e-4));
  }
}

TEST_CASE("smearing wider than the map is rejected") {
  DispersionSpec spec;
  spec.jitter_fwhm_ps = 5000.0;  // about 5.3 nm
  CHECK_THROWS_AS(smear_csi(uniform_map(16, 2.0), spec), InvalidSpec);
}

TEST_CASE("fringe contrast drops under smearing") {
  const auto jsa = SourceDefaults::jsa(128);
  const CsiMap map = fourfold_csi(jsa, jsa, 10.0);
  const double before = fringe_contrast(map, 10.0);
  const double after = fringe_contrast(smear_csi(map, DispersionSpec{}), 10.0);
  CHECK(before > 0.0);
  CHECK(after < before);
}

TEST_CASE("sampling is deterministic and follows the map") {
  const auto jsa = SourceDefaults::jsa(64);
  const CsiMap map = fourfold_csi(jsa, jsa, 0.0);
  const DispersionSpec spec;
  const auto a = sample_events(map, 1000, 42, spec);
  const auto b = sample_events(map, 1000, 42, spec);
  const auto c = sample_events(map, 1000, 43, spec);
  REQUIRE(a.size() == 1000);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].first.arrival_time_ps == b[i].first.arrival_time_ps &&
           a[i].second.arrival_time_ps == b[i].second.arrival_time_ps;
    differ = differ || a[i].first.arrival_time_ps != c[i].first.arrival_time_ps;
    CHECK(a[i].first.channel == Channel::out1);
    CHECK(a[i].second.channel == Channel::out2);
  }
  CHECK(same);
  CHECK(differ);

  // Zero jitter: every event sits exactly on a grid wavelength with nonzero weight.
  DispersionSpec exact = spec;
  exact.jitter_fwhm_ps = 0.0;
  for (const auto& e : sample_events(map, 200, 7, exact)) {
    const double l = time_to_wavelength(e.first.arrival_time_ps, exact);
    double best = 1e9;
    for (std::size_t k = 0; k < 64; ++k)
      best = std::min(best, std::abs(units::omega_to_wavelength_nm(map.axis1.point(k)) - l));
    CHECK(best < 1e-9);
  }
}

TEST_CASE("sampling rejects unusable maps") {
  CsiMap m = uniform_map(4, 5.0);
  m.intensity.setZero();
  CHECK_THROWS_AS(sample_events(m, 10, 1, DispersionSpec{}), InvalidSpec);
  m.intensity(1, 1) = -1.0;
  CHECK_THROWS_AS(sample_events(m, 10, 1, DispersionSpec{}), InvalidSpec);
}

TEST_CASE("histogram reconstruction") {
  DispersionSpec spec;
  auto pair = [&](double l1, double l2) {
    return EventPair{{Channel::out1, wavelength_to_time(l1, spec)},
                     {Channel::out2, wavelength_to_time(l2, spec)}};
  };
  const std::vector<EventPair> events{pair(1580.0, 1590.0), pair(1580.05, 1590.0),
                                      pair(1580.5, 1590.25), pair(1581.0, 1590.5)};
  const Histogram2D h = reconstruct_csi(events, spec, 0.25);
  CHECK(h.edges1.front() == doctest::Approx(1580.0));
  CHECK(h.counts.rows() == 4);
  CHECK(h.counts.cols() == 2);
  CHECK(h.total() == 4);
  CHECK(h.counts(0, 0) == 2);
  CHECK(h.counts(2, 1) == 1);
  CHECK(h.counts(3, 1) == 1);  // last edge is inclusive
  CHECK(h.locate(1579.0, 1590.0).first == -1);
  CHECK(h.locate(1580.1, 1590.1) == std::pair<std::ptrdiff_t, std::ptrdiff_t>{0, 0});

  CHECK_THROWS_AS(reconstruct_csi(std::vector<EventPair>{}, spec, 0.1), InvalidSpec);
  CHECK_THROWS_AS(reconstruct_csi(events, spec, 0.0), InvalidSpec);

  std::ostringstream out;
  write_histogram_csv(out, h);
  CHECK(out.str().rfind("lambda1_nm,lambda2_nm,count\n", 0) == 0);
}

TEST_CASE("events CSV round trip") {
  const std::vector<EventPair> events{{{Channel::out1, -12.5}, {Channel::out2, 3.25}},
                                      {{Channel::out1, 0.1}, {Channel::out2, 1e4}}};
  std::stringstream buf;
  write_events_csv(buf, events);
  const auto back = read_events_csv(buf);
  REQUIRE(back.size() == 2);
  CHECK(back[1].second.arrival_time_ps == 1e4);
  CHECK(back[0].first.arrival_time_ps == -12.5);

  std::istringstream no_header("out1,1\nout2,2\n");
  CHECK_THROWS_AS(read_events_csv(no_header), InvalidSpec);
  std::istringstream odd("channel,arrival_time_ps\nout1,1\n");
  CHECK_THROWS_AS(read_events_csv(odd), InvalidSpec);
  std::istringstream bad_channel("channel,arrival_time_ps\nout3,1\nout2,2\n");
  CHECK_THROWS_AS(read_events_csv(bad_channel), InvalidSpec);
  std::istringstream bad_time("channel,arrival_time_ps\nout1,x\nout2,2\n");
  CHECK_THROWS_AS(read_events_csv(bad_time), InvalidSpec);
  std::istringstream order("channel,arrival_time_ps\nout2,1\nout1,2\n");
  CHECK_THROWS_AS(read_events_csv(order), InvalidSpec);
}

TEST_CASE("spectral filtering") {
  const auto jsa = SourceDefaults::jsa(128);
  const double centre = jsa.grid_signal().center_wavelength_nm();
  CHECK(filter_signal(jsa, kNoFilter, centre).amplitude() == jsa.amplitude());

  const auto f = filter_signal(jsa, 1.0, centre);
  CHECK(f.norm_squared() == doctest::Approx(1.0));
  for (std::size_t j = 0; j < 128; ++j) {
    const double l = units::omega_to_wavelength_nm(jsa.grid_signal().point(j));
    if (std::abs(l - centre) > 0.5)
      CHECK(f.amplitude().row(static_cast<Eigen::Index>(j)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK_THROWS_AS(filter_signal(jsa, 0.1, centre), InvalidSpec);
  CHECK_THROWS_AS(filter_signal(jsa, -1.0, centre), InvalidSpec);

  const std::vector<double> widths{kNoFilter, 2.66, 1.06, 0.53};
  const auto scan = window_filter_scan(jsa, jsa, widths);
  for (std::size_t i = 1; i < scan.size(); ++i) CHECK(scan[i].visibility >= scan[i - 1].visibility);

  std::ostringstream out;
  write_scan_csv(out, scan);
  CHECK(out.str().rfind("window_nm,visibility\ninf,", 0) == 0);
}
