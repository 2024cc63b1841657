#include "homsim/multipair.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/Eigenvalues>

#include "homsim/csv.hpp"

namespace homsim {

namespace {

constexpr double kProbabilitySlack = 1e-9;

void check_mode(const CovarianceMatrix& g, std::size_t mode) {
  if (mode >= g.modes())
    throw InvalidSpec("mode index " + std::to_string(mode) + " out of range");
}

// Applies gamma -> S gamma S^T where S acts only on the 4x4 block of (a, b).
CovarianceMatrix apply_two_mode(const CovarianceMatrix& gamma, std::size_t a,
                                std::size_t b, const Eigen::Matrix4d& block) {
  RealMatrix s = RealMatrix::Identity(gamma.matrix().rows(), gamma.matrix().cols());
  const std::array<Eigen::Index, 4> idx{static_cast<Eigen::Index>(2 * a),
                                        static_cast<Eigen::Index>(2 * a + 1),
                                        static_cast<Eigen::Index>(2 * b),
                                        static_cast<Eigen::Index>(2 * b + 1)};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) s(idx[r], idx[c]) = block(r, c);
  RealMatrix out = s * gamma.matrix() * s.transpose();
  out = 0.5 * (out + out.transpose()).eval();
  return CovarianceMatrix(std::move(out));
}

}  // namespace

CovarianceMatrix::CovarianceMatrix(std::size_t modes)
    : matrix_(RealMatrix::Identity(static_cast<Eigen::Index>(2 * modes),
                                   static_cast<Eigen::Index>(2 * modes))) {}

CovarianceMatrix::CovarianceMatrix(RealMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() % 2 != 0)
    throw InvalidSpec("covariance matrix must be square with even dimension");
  if (!matrix_.allFinite()) throw NumericalFailure("covariance matrix has non-finite entries");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if ((matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw InvalidSpec("covariance matrix is not symmetric");
}

double CovarianceMatrix::physicality_margin() const {
  const Eigen::Index n = matrix_.rows();
  ComplexMatrix h = matrix_.cast<cdouble>();
  for (Eigen::Index k = 0; k < n; k += 2) {
    h(k, k + 1) += cdouble(0.0, 1.0);
    h(k + 1, k) -= cdouble(0.0, 1.0);
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool CovarianceMatrix::is_physical(double tol) const { return physicality_margin() >= -tol; }

CovarianceMatrix CovarianceMatrix::submatrix(std::span<const std::size_t> modes) const {
  const auto m = static_cast<Eigen::Index>(modes.size());
  RealMatrix out(2 * m, 2 * m);
  for (Eigen::Index r = 0; r < m; ++r) {
    check_mode(*this, modes[r]);
    for (Eigen::Index c = 0; c < m; ++c)
      out.block<2, 2>(2 * r, 2 * c) = matrix_.block<2, 2>(
          static_cast<Eigen::Index>(2 * modes[r]), static_cast<Eigen::Index>(2 * modes[c]));
  }
  return CovarianceMatrix(std::move(out));
}

CovarianceMatrix CovarianceMatrix::direct_sum(const CovarianceMatrix& a,
                                              const CovarianceMatrix& b) {
  const Eigen::Index na = a.matrix_.rows(), nb = b.matrix_.rows();
  RealMatrix out = RealMatrix::Zero(na + nb, na + nb);
  out.topLeftCorner(na, na) = a.matrix_;
  out.bottomRightCorner(nb, nb) = b.matrix_;
  return CovarianceMatrix(std::move(out));
}

CovarianceMatrix tmsv_cov(double r_eff) {
  if (!(r_eff >= 0.0) || !std::isfinite(r_eff))
    throw InvalidSpec("tmsv_cov: squeezing must be non-negative");
  const double c = std::cosh(2.0 * r_eff);
  const double s = std::sinh(2.0 * r_eff);
  RealMatrix g(4, 4);
  g << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return CovarianceMatrix(std::move(g));
}

CovarianceMatrix apply_loss(const CovarianceMatrix& gamma, std::span<const double> eta_per_mode) {
  if (eta_per_mode.size() != gamma.modes())
    throw InvalidSpec("apply_loss: need one efficiency per mode");
  RealVector scale(gamma.matrix().rows());
  RealVector noise(gamma.matrix().rows());
  for (std::size_t k = 0; k < eta_per_mode.size(); ++k) {
    const double eta = eta_per_mode[k];
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidSpec("apply_loss: efficiency outside [0, 1]");
    const auto i = static_cast<Eigen::Index>(2 * k);
    scale[i] = scale[i + 1] = std::sqrt(eta);
    noise[i] = noise[i + 1] = 1.0 - eta;
  }
  RealMatrix out = scale.asDiagonal() * gamma.matrix() * scale.asDiagonal();
  out.diagonal() += noise;
  return CovarianceMatrix(std::move(out));
}

CovarianceMatrix apply_beamsplitter(const CovarianceMatrix& gamma, std::size_t mode_a,
                                    std::size_t mode_b, double t) {
  check_mode(gamma, mode_a);
  check_mode(gamma, mode_b);
  if (mode_a == mode_b) throw InvalidSpec("apply_beamsplitter: modes must differ");
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidSpec("apply_beamsplitter: t outside [0, 1]");
  const double ct = std::sqrt(t);
  const double st = std::sqrt(1.0 - t);
  Eigen::Matrix4d block;
  block << ct, 0, st, 0,
           0, ct, 0, st,
           -st, 0, ct, 0,
           0, -st, 0, ct;
  return apply_two_mode(gamma, mode_a, mode_b, block);
}

void MultipairConfig::validate() const {
  if (!(mean_photon_number >= 0.0) || !std::isfinite(mean_photon_number))
    throw InvalidSpec("multipair: mean photon number must be >= 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    throw InvalidSpec("multipair: efficiency must lie in (0, 1]");
  if (!(mode_match >= 0.0 && mode_match <= 1.0))
    throw InvalidSpec("multipair: mode match must lie in [0, 1]");
  if (schmidt_eigenvalues.empty()) throw InvalidSpec("multipair: no Schmidt eigenvalues");
  double total = 0.0;
  for (double l : schmidt_eigenvalues) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw InvalidSpec("multipair: negative eigenvalue");
    total += l;
  }
  if (!(total > 0.0)) throw InvalidSpec("multipair: eigenvalues sum to zero");
}

std::vector<double> MultipairConfig::effective_eigenvalues() const {
  std::vector<double> out = schmidt_eigenvalues;
  if (renormalize) {
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    for (double& l : out) l /= total;
  }
  return out;
}

std::span<const std::size_t> ModeLayout::detector_modes(std::size_t detector) {
  static constexpr std::size_t kOut1[] = {signal1, port1_late};
  static constexpr std::size_t kOut2[] = {signal2, port2_late};
  static constexpr std::size_t kHerald1[] = {idler1};
  static constexpr std::size_t kHerald2[] = {idler2};
  switch (detector) {
    case 0: return kOut1;
    case 1: return kOut2;
    case 2: return kHerald1;
    case 3: return kHerald2;
    default: throw InvalidSpec("detector index out of range");
  }
}

std::vector<CovarianceMatrix> assemble_state(std::span<const double> effective_r,
                                             double efficiency, double xi) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw InvalidSpec("assemble_state: xi outside [0, 1]");
  using L = ModeLayout;
  const std::array<double, L::kModes> eta{efficiency, efficiency, efficiency,
                                          efficiency, 1.0, 1.0};
  std::vector<CovarianceMatrix> out;
  out.reserve(effective_r.size());
  for (double r : effective_r) {
    CovarianceMatrix g = CovarianceMatrix::direct_sum(
        CovarianceMatrix::direct_sum(tmsv_cov(r), tmsv_cov(r)), CovarianceMatrix(2));
    g = apply_loss(g, eta);
    // Source 2's signal: amplitude sqrt(xi) in the matched temporal mode,
    // sqrt(1 - xi) in the orthogonal one.
    g = apply_beamsplitter(g, L::signal2, L::port2_late, xi);
    g = apply_beamsplitter(g, L::signal1, L::signal2, 0.5);
    g = apply_beamsplitter(g, L::port1_late, L::port2_late, 0.5);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<CovarianceMatrix> assemble_state(const MultipairConfig& cfg, bool overlapped) {
  cfg.validate();
  const std::vector<double> lambda = cfg.effective_eigenvalues();
  const double p = cfg.mean_photon_number / (cfg.mean_photon_number + 1.0);
  const double r = solve_r(p, lambda);
  std::vector<double> r_eff;
  for (double l : lambda) r_eff.push_back(r * std::sqrt(l));
  return assemble_state(r_eff, cfg.efficiency, overlapped ? cfg.mode_match : 0.0);
}

double pair_probability(double r, std::span<const double> eigenvalues) {
  // 1 - prod sech^2, summed in log space to keep precision near p = 0.
  double log_vacuum = 0.0;
  for (double l : eigenvalues) {
    const double c = std::cosh(r * std::sqrt(l));
    log_vacuum -= 2.0 * std::log(c);
  }
  return -std::expm1(log_vacuum);
}

double solve_r(double p, std::span<const double> eigenvalues) {
  if (!(p >= 0.0) || !(p < 1.0)) throw InvalidSpec("solve_r: p must lie in [0, 1)");
  if (eigenvalues.empty()) throw InvalidSpec("solve_r: no eigenvalues");
  if (p == 0.0) return 0.0;
  double lo = 0.0, hi = 10.0;
  if (pair_probability(hi, eigenvalues) < p)
    throw NumericalFailure("solve_r: p not bracketed by r in [0, 10]");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (pair_probability(mid, eigenvalues) < p ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  if (std::abs(pair_probability(r, eigenvalues) - p) > 1e-12)
    throw NumericalFailure("solve_r: bisection did not reach 1e-12");
  return r;
}

double no_click_probability(std::span<const CovarianceMatrix> state,
                            std::span<const std::size_t> detectors) {
  std::vector<std::size_t> modes;
  for (std::size_t d : detectors) {
    const auto watched = ModeLayout::detector_modes(d);
    modes.insert(modes.end(), watched.begin(), watched.end());
  }
  if (modes.empty()) return 1.0;
  std::sort(modes.begin(), modes.end());
  if (std::adjacent_find(modes.begin(), modes.end()) != modes.end())
    throw InvalidSpec("detector listed twice");

  double q = 1.0;
  for (const CovarianceMatrix& g : state) {
    const RealMatrix sub = g.submatrix(modes).matrix();
    const double det = (sub + RealMatrix::Identity(sub.rows(), sub.cols())).determinant();
    if (!(det > 0.0)) throw NumericalFailure("non-positive det(gamma_S + I)");
    q *= std::ldexp(1.0, static_cast<int>(modes.size())) / std::sqrt(det);
  }
  if (q < -kProbabilitySlack || q > 1.0 + kProbabilitySlack)
    throw NumericalFailure("no-click probability outside [0, 1]");
  return std::clamp(q, 0.0, 1.0);
}

double coincidence_probability(std::span<const CovarianceMatrix> state,
                               std::span<const std::size_t> detectors) {
  const std::size_t n = detectors.size();
  if (n > 16) throw InvalidSpec("too many detectors");
  // Fixed summation order: subsets by increasing bitmask.
  double total = 0.0;
  std::vector<std::size_t> subset;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    subset.clear();
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (1u << k)) subset.push_back(detectors[k]);
    const double sign = (std::popcount(mask) % 2 == 0) ? 1.0 : -1.0;
    total += sign * no_click_probability(state, subset);
  }
  if (total < -kProbabilitySlack || total > 1.0 + kProbabilitySlack)
    throw NumericalFailure("coincidence probability outside [0, 1]");
  return std::clamp(total, 0.0, 1.0);
}

double fourfold_click_prob(std::span<const CovarianceMatrix> state) {
  static constexpr std::size_t kAll[kDetectorCount] = {0, 1, 2, 3};
  return coincidence_probability(state, kAll);
}

MultipairReport multipair_report(const MultipairConfig& cfg) {
  cfg.validate();
  const std::vector<double> lambda = cfg.effective_eigenvalues();
  MultipairReport rep;
  rep.nbar = cfg.mean_photon_number;
  rep.eta = cfg.efficiency;
  rep.xi = cfg.mode_match;
  rep.p = rep.nbar / (rep.nbar + 1.0);
  rep.r = solve_r(rep.p, lambda);

  std::vector<double> r_eff;
  for (double l : lambda) r_eff.push_back(rep.r * std::sqrt(l));
  const auto delayed = assemble_state(r_eff, cfg.efficiency, 0.0);
  const auto overlapped = assemble_state(r_eff, cfg.efficiency, cfg.mode_match);
  rep.P_mean = fourfold_click_prob(delayed);
  rep.P_min = fourfold_click_prob(overlapped);
  if (!(rep.P_mean > 0.0))
    throw NumericalFailure("four-fold probability without overlap is zero; visibility undefined");
  rep.V = (rep.P_mean - rep.P_min) / rep.P_mean;
  return rep;
}

double multipair_visibility(const MultipairConfig& cfg) { return multipair_report(cfg).V; }

void write_multipair_csv(std::ostream& out, std::span<const MultipairReport> rows) {
  out << "nbar,eta,xi,p,r,P_mean,P_min,V\n";
  for (const MultipairReport& r : rows)
    out << csv::row({r.nbar, r.eta, r.xi, r.p, r.r, r.P_mean, r.P_min, r.V});
}

}  // namespace homsim
