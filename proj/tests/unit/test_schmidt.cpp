#include <doctest.h>

#include <random>
#include <sstream>

#include "homsim/schmidt.hpp"

using namespace homsim;

namespace {

JointSpectralAmplitude random_jsa(std::uint64_t seed, std::size_t ns, std::size_t ni) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const FrequencyGrid gs(2e15, 3e13, ns), gi(1.9e15, 2e13, ni);
  ComplexMatrix a(static_cast<Eigen::Index>(ns), static_cast<Eigen::Index>(ni));
  for (Eigen::Index j = 0; j < a.rows(); ++j)
    for (Eigen::Index k = 0; k < a.cols(); ++k) a(j, k) = cdouble(n(rng), n(rng));
  return {gs, gi, a, true};
}

}  // namespace

TEST_CASE("SVD purity matches the reduced-kernel purity") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto jsa = random_jsa(seed, 12, 9);
    const auto dec = decompose(jsa, 0);
    CHECK(purity(dec) == doctest::Approx(reduced_kernel(jsa, Axis::idler).purity()).epsilon(1e-12));
    CHECK(dec.eigenvalues.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(dec.eigenvalues.size() == 9);
  }
}

TEST_CASE("full-rank reconstruction and orthonormal modes") {
  const auto jsa = random_jsa(7, 10, 10);
  const auto dec = decompose(jsa, 0);
  CHECK((dec.reconstruct() - jsa.amplitude()).cwiseAbs().maxCoeff() <
        1e-12 * jsa.amplitude().cwiseAbs().maxCoeff());

  const double ds = jsa.grid_signal().spacing();
  const double di = jsa.grid_idler().spacing();
  const ComplexMatrix gram_g = dec.signal_modes.adjoint() * dec.signal_modes * ds;
  const ComplexMatrix gram_h = dec.idler_modes.adjoint() * dec.idler_modes * di;
  CHECK((gram_g - ComplexMatrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((gram_h - ComplexMatrix::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);

  for (Eigen::Index l = 1; l < dec.eigenvalues.size(); ++l)
    CHECK(dec.eigenvalues[l] <= dec.eigenvalues[l - 1]);
}

TEST_CASE("phase convention: largest signal entry is real and positive") {
  const auto dec = decompose(random_jsa(11, 8, 8), 3);
  for (Eigen::Index l = 0; l < dec.signal_modes.cols(); ++l) {
    Eigen::Index peak = 0;
    dec.signal_modes.col(l).cwiseAbs().maxCoeff(&peak);
    CHECK(dec.signal_modes(peak, l).real() > 0.0);
    CHECK(std::abs(dec.signal_modes(peak, l).imag()) < 1e-12 * std::abs(dec.signal_modes(peak, l)));
  }
}

TEST_CASE("a product state has one Schmidt mode") {
  const FrequencyGrid g(2e15, 1e13, 16);
  RealVector u(16), v(16);
  for (int k = 0; k < 16; ++k) {
    u[k] = std::exp(-0.1 * (k - 7) * (k - 7));
    v[k] = std::exp(-0.05 * (k - 9) * (k - 9));
  }
  const JointSpectralAmplitude jsa(g, g, (u * v.transpose()).cast<cdouble>(), true);
  const auto dec = decompose(jsa, 1);
  CHECK(dec.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(purity(dec) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((dec.reconstruct() - jsa.amplitude()).cwiseAbs().maxCoeff() < 1e-12 * jsa.amplitude().cwiseAbs().maxCoeff());
}

TEST_CASE("truncation and renormalized eigenvalues") {
  const auto dec = decompose(random_jsa(5, 10, 10), 4);
  CHECK(dec.truncation == 4);
  const auto raw = dec.retained(false);
  const auto norm = dec.retained(true);
  REQUIRE(raw.size() == 4);
  double total = 0.0;
  for (double v : norm) total += v;
  CHECK(total == doctest::Approx(1.0));
  CHECK(norm[0] / norm[1] == doctest::Approx(raw[0] / raw[1]));
  CHECK_THROWS_AS(decompose(random_jsa(5, 10, 10), 11), InvalidSpec);
}

TEST_CASE("effective squeezers scale with sqrt(lambda)") {
  const std::vector<double> lambda{0.64, 0.36, 0.0};
  const auto r = effective_squeezers(lambda, 0.5);
  CHECK(r[0] == doctest::Approx(0.4));
  CHECK(r[1] == doctest::Approx(0.3));
  CHECK(r[2] == 0.0);
  CHECK_THROWS_AS(effective_squeezers(lambda, -1.0), InvalidSpec);
  const std::vector<double> negative{-0.1};
  CHECK_THROWS_AS(effective_squeezers(negative, 1.0), InvalidSpec);
}

TEST_CASE("default source eigenvalues") {
  const auto dec = decompose(SourceDefaults::jsa(), 5);
  CHECK(dec.eigenvalues[0] == doctest::Approx(0.9).epsilon(0.011));
  CHECK(purity(dec) == doctest::Approx(0.82).epsilon(0.006));
  std::ostringstream out;
  write_eigenvalues_csv(out, dec);
  CHECK(out.str().rfind("index,lambda\n1,", 0) == 0);
}
