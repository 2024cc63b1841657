#include "homsim/schmidt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <Eigen/SVD>

#include "homsim/csv.hpp"

namespace homsim {

std::vector<double> SchmidtDecomposition::retained(bool renormalize) const {
  std::vector<double> out(eigenvalues.data(), eigenvalues.data() + truncation);
  if (renormalize) {
    const double total = std::accumulate(out.begin(), out.end(), 0.0);
    if (total > 0.0)
      for (double& v : out) v /= total;
  }
  return out;
}

ComplexMatrix SchmidtDecomposition::reconstruct() const {
  const auto k = static_cast<Eigen::Index>(truncation);
  RealVector root = eigenvalues.head(k).cwiseSqrt();
  return signal_modes.leftCols(k) * root.asDiagonal() *
         idler_modes.leftCols(k).transpose();
}

SchmidtDecomposition decompose(const JointSpectralAmplitude& jsa, std::size_t k) {
  jsa.require_normalized();
  const double ds = jsa.grid_signal().spacing();
  const double di = jsa.grid_idler().spacing();
  const auto rank = static_cast<std::size_t>(
      std::min(jsa.amplitude().rows(), jsa.amplitude().cols()));
  if (k == 0) k = rank;
  if (k > rank) throw InvalidSpec("decompose: truncation exceeds min(N_s, N_i)");

  const ComplexMatrix a = jsa.amplitude() * std::sqrt(ds * di);
  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalFailure("decompose: SVD failed");

  // a = U S V^H  =>  g_l = U_l / sqrt(ds), h_l = conj(V_l) / sqrt(di).
  ComplexMatrix g = svd.matrixU() / std::sqrt(ds);
  ComplexMatrix h = svd.matrixV().conjugate() / std::sqrt(di);

  // Make the largest-magnitude entry of each g_l real positive; h_l takes
  // the compensating phase.
  for (Eigen::Index l = 0; l < g.cols(); ++l) {
    Eigen::Index peak = 0;
    g.col(l).cwiseAbs().maxCoeff(&peak);
    const double mag = std::abs(g(peak, l));
    if (mag == 0.0) continue;
    const cdouble phase = g(peak, l) / mag;
    g.col(l) *= std::conj(phase);
    h.col(l) *= phase;
  }

  return SchmidtDecomposition{svd.singularValues().cwiseAbs2(), std::move(g),
                              std::move(h), k, jsa.grid_signal(),
                              jsa.grid_idler()};
}

double purity(const SchmidtDecomposition& dec) {
  return dec.eigenvalues.squaredNorm();
}

std::vector<double> effective_squeezers(std::span<const double> eigenvalues,
                                        double r) {
  if (!(r >= 0.0) || !std::isfinite(r))
    throw InvalidSpec("effective_squeezers: r must be non-negative");
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (double lambda : eigenvalues) {
    if (lambda < 0.0) throw InvalidSpec("effective_squeezers: negative eigenvalue");
    out.push_back(r * std::sqrt(lambda));
  }
  return out;
}

std::vector<double> effective_squeezers(const SchmidtDecomposition& dec, double r,
                                        bool renormalize) {
  const std::vector<double> kept = dec.retained(renormalize);
  return effective_squeezers(std::span<const double>(kept), r);
}

void write_eigenvalues_csv(std::ostream& out, const SchmidtDecomposition& dec) {
  out << "index,lambda\n";
  for (Eigen::Index l = 0; l < dec.eigenvalues.size(); ++l)
    out << csv::row({static_cast<double>(l + 1), dec.eigenvalues[l]});
}

}  // namespace homsim
