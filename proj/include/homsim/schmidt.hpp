#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "homsim/spdc.hpp"

namespace homsim {

/// f(w_s, w_i) = sum_l sqrt(lambda_l) g_l(w_s) h_l(w_i), with the first
/// `truncation` mode pairs kept.
struct SchmidtDecomposition {
  RealVector eigenvalues;       // all of them, descending
  ComplexMatrix signal_modes;   // columns g_l, orthonormal under dw_s
  ComplexMatrix idler_modes;    // columns h_l, orthonormal under dw_i
  std::size_t truncation = 0;
  FrequencyGrid grid_signal;
  FrequencyGrid grid_idler;

  /// Leading `truncation` eigenvalues, optionally rescaled to sum to one.
  std::vector<double> retained(bool renormalize) const;

  /// sum over the retained modes; equals the input JSA when truncation is
  /// full rank.
  ComplexMatrix reconstruct() const;
};

/// Pass k = 0 for full rank.
SchmidtDecomposition decompose(const JointSpectralAmplitude& jsa, std::size_t k = 5);

/// sum lambda_l^2 over every (untruncated) eigenvalue.
double purity(const SchmidtDecomposition& dec);

/// r * sqrt(lambda_l) per Schmidt mode.
std::vector<double> effective_squeezers(std::span<const double> eigenvalues, double r);
std::vector<double> effective_squeezers(const SchmidtDecomposition& dec, double r,
                                        bool renormalize = false);

/// Header `index,lambda`; index starts at 1.
void write_eigenvalues_csv(std::ostream& out, const SchmidtDecomposition& dec);

}  // namespace homsim
