#pragma once

// Dispersive-fiber time-of-flight spectrometer: wavelength <-> arrival time
// mapping, jitter-limited resolution, synthetic time-tag streams and
// coincidence-window (spectral) filtering.

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "homsim/interference.hpp"

namespace homsim {

struct DispersionSpec {
  double dispersion_ps_per_km_nm = 125.0;
  double fiber_length_km = 7.53;
  double jitter_fwhm_ps = 100.0;
  double reference_wavelength_nm = 1584.0;

  void validate() const;
  /// D * L in ps/nm.
  double total_dispersion() const { return dispersion_ps_per_km_nm * fiber_length_km; }
};

double wavelength_to_time(double wavelength_nm, const DispersionSpec& spec);
double time_to_wavelength(double time_ps, const DispersionSpec& spec);

/// Wavelength resolution (FWHM, nm) set by the timing jitter.
double resolution(const DispersionSpec& spec);

/// Spectral width equivalent to a coincidence window. The window spans
/// factor * D * L ps per nm; factor 2 reproduces the published
/// 5/2/1 ns <-> 2.66/1.06/0.53 nm pairs.
double window_to_bandwidth(double window_ns, const DispersionSpec& spec,
                           double factor = 2.0);

/// Separable Gaussian blur of both map axes by the jitter-limited
/// resolution. Each source bin's weights are renormalized over the bins
/// inside the map, so the total intensity is conserved.
CsiMap smear_csi(const CsiMap& csi, const DispersionSpec& spec);

/// Relative strength of the interference fringes of a map with delay tau:
/// DFT magnitude of the antidiagonal profile at the bin nearest the fringe
/// frequency, divided by the profile's DC magnitude.
double fringe_contrast(const CsiMap& map, double tau_ps);

enum class Channel : std::uint8_t { out1, out2 };

struct EventRecord {
  Channel channel;
  double arrival_time_ps;
};

struct EventPair {
  EventRecord first;   // out1
  EventRecord second;  // out2
};

/// Draws n_pairs cells from the non-negative map as a discrete 2D
/// distribution, maps each cell's wavelengths to arrival times and adds
/// independent Gaussian jitter per channel. Deterministic for a given seed.
std::vector<EventPair> sample_events(const CsiMap& csi, std::size_t n_pairs,
                                     std::uint64_t seed, const DispersionSpec& spec);

/// Counts on uniform wavelength bins (nm). Bin (i, j) covers
/// [edges1[i], edges1[i+1]) x [edges2[j], edges2[j+1]); the last edge is
/// inclusive.
struct Histogram2D {
  std::vector<double> edges1;
  std::vector<double> edges2;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

  std::uint64_t total() const { return counts.sum(); }
  /// Bin containing a wavelength pair, or -1 components when outside.
  std::pair<std::ptrdiff_t, std::ptrdiff_t> locate(double lambda1_nm, double lambda2_nm) const;
};

/// Bins start at each channel's shortest reconstructed wavelength.
Histogram2D reconstruct_csi(std::span<const EventPair> events, const DispersionSpec& spec,
                            double bin_width_nm);

/// Rectangular filter of full width `width_nm` on the signal axis centered
/// at `center_nm`; the result is renormalized. Infinite width is a no-op.
JointSpectralAmplitude filter_signal(const JointSpectralAmplitude& jsa, double width_nm,
                                     double center_nm);

struct WindowVisibility {
  double width_nm;
  double visibility;
};

/// Four-fold visibility of two sources after identical signal filtering at
/// each width (the degenerate wavelength, i.e. the signal grid center, is
/// the filter center). Use infinity for "no filter".
std::vector<WindowVisibility> window_filter_scan(const JointSpectralAmplitude& jsa1,
                                                 const JointSpectralAmplitude& jsa2,
                                                 std::span<const double> widths_nm);

inline constexpr double kNoFilter = std::numeric_limits<double>::infinity();

/// Header `channel,arrival_time_ps`; two rows per pair, out1 first.
void write_events_csv(std::ostream& out, std::span<const EventPair> events);
/// Parses what write_events_csv produces. Throws InvalidSpec.
std::vector<EventPair> read_events_csv(std::istream& in);
/// Header `lambda1_nm,lambda2_nm,count`, bin centers, row-major.
void write_histogram_csv(std::ostream& out, const Histogram2D& hist);
/// Header `window_nm,visibility`.
void write_scan_csv(std::ostream& out, std::span<const WindowVisibility> scan);

}  // namespace homsim
