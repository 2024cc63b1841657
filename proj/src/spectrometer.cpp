#include "homsim/spectrometer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "homsim/csv.hpp"

namespace homsim {

namespace {

const double kFwhmPerSigma = 2.0 * std::sqrt(2.0 * std::numbers::ln2);

// Discrete kernel whose transfer function is exp(-sigma^2 k^2 / 2) on
// |k| <= pi: grid samples of a continuous Gaussian blur applied to the
// band-limited interpolant of the data. Unlike sampling the Gaussian itself,
// this stays exact when sigma is below one bin.
RealVector band_limited_gaussian(double sigma_bins, Eigen::Index reach) {
  constexpr int kPanels = 4096;  // Simpson panels on [0, pi]
  const double h = std::numbers::pi / kPanels;
  RealVector w(2 * reach + 1);
  for (Eigen::Index d = 0; d <= reach; ++d) {
    double acc = 0.0;
    for (int i = 0; i <= kPanels; ++i) {
      const double k = i * h;
      const double c = (i == 0 || i == kPanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += c * std::exp(-0.5 * sigma_bins * sigma_bins * k * k) * std::cos(k * static_cast<double>(d));
    }
    w[reach + d] = w[reach - d] = acc * h / 3.0 / std::numbers::pi;
  }
  return w;
}

// Blurs along the rows (axis = 0) or columns (axis = 1) of `m`.
RealMatrix blur_axis(const RealMatrix& m, int axis, double sigma_bins) {
  const Eigen::Index n = axis == 0 ? m.rows() : m.cols();
  const Eigen::Index reach = n - 1;
  const RealVector w = band_limited_gaussian(sigma_bins, reach);

  // Per-source normalization over in-map targets.
  RealVector norm(n);
  for (Eigen::Index s = 0; s < n; ++s) norm[s] = w.segment(reach - s, n).sum();

  RealMatrix out = RealMatrix::Zero(m.rows(), m.cols());
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index t = 0; t < n; ++t) {
      const double weight = w[t - s + reach] / norm[s];
      if (axis == 0)
        out.row(t) += weight * m.row(s);
      else
        out.col(t) += weight * m.col(s);
    }
  }
  return out;
}

double axis_sigma_bins(const FrequencyGrid& axis, const DispersionSpec& spec) {
  const double sigma_nm = resolution(spec) / kFwhmPerSigma;
  const double sigma_omega = sigma_nm * units::omega_per_nm(axis.center_wavelength_nm());
  if (kFwhmPerSigma * sigma_omega > axis.span())
    throw InvalidSpec("smear_csi: resolution kernel is wider than the map span");
  return sigma_omega / axis.spacing();
}

std::size_t bin_index(double value, double lo, double width, std::size_t n) {
  const double pos = std::floor((value - lo) / width);
  if (pos < 0.0) return 0;
  return std::min(static_cast<std::size_t>(pos), n - 1);
}

std::vector<double> make_edges(double lo, double hi, double width) {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
  std::vector<double> edges(n + 1);
  for (std::size_t i = 0; i <= n; ++i) edges[i] = lo + static_cast<double>(i) * width;
  // hi must fall inside the last bin (edge inclusive).
  if (edges.back() < hi) edges.back() = hi;
  return edges;
}

std::ptrdiff_t locate_in(const std::vector<double>& edges, double v) {
  if (v < edges.front() || v > edges.back()) return -1;
  const double width = edges[1] - edges[0];
  return static_cast<std::ptrdiff_t>(bin_index(v, edges.front(), width, edges.size() - 1));
}

const char* channel_name(Channel c) { return c == Channel::out1 ? "out1" : "out2"; }

}  // namespace

void DispersionSpec::validate() const {
  if (!std::isfinite(dispersion_ps_per_km_nm) || !std::isfinite(fiber_length_km) ||
      total_dispersion() == 0.0)
    throw InvalidSpec("dispersion: D * L must be finite and nonzero");
  if (!(jitter_fwhm_ps >= 0.0) || !std::isfinite(jitter_fwhm_ps))
    throw InvalidSpec("dispersion: jitter must be >= 0");
  if (!(reference_wavelength_nm > 0.0)) throw InvalidSpec("dispersion: reference wavelength must be > 0");
}

double wavelength_to_time(double wavelength_nm, const DispersionSpec& spec) {
  return spec.total_dispersion() * (wavelength_nm - spec.reference_wavelength_nm);
}

double time_to_wavelength(double time_ps, const DispersionSpec& spec) {
  if (spec.total_dispersion() == 0.0)
    throw InvalidSpec("time_to_wavelength: zero total dispersion");
  return spec.reference_wavelength_nm + time_ps / spec.total_dispersion();
}

double resolution(const DispersionSpec& spec) {
  spec.validate();
  return spec.jitter_fwhm_ps / std::abs(spec.total_dispersion());
}

double window_to_bandwidth(double window_ns, const DispersionSpec& spec, double factor) {
  spec.validate();
  if (!(window_ns > 0.0)) throw InvalidSpec("window must be positive");
  if (!(factor > 0.0)) throw InvalidSpec("window conversion factor must be positive");
  return window_ns * 1e3 / (factor * std::abs(spec.total_dispersion()));
}

CsiMap smear_csi(const CsiMap& csi, const DispersionSpec& spec) {
  spec.validate();
  if (spec.jitter_fwhm_ps == 0.0) return csi;
  CsiMap out = csi;
  out.intensity = blur_axis(csi.intensity, 0, axis_sigma_bins(csi.axis1, spec));
  out.intensity = blur_axis(out.intensity, 1, axis_sigma_bins(csi.axis2, spec));
  return out;
}

double fringe_contrast(const CsiMap& map, double tau_ps) {
  const AntidiagonalProfile profile = antidiagonal_profile(map);
  const RealVector spectrum = fringe_spectrum(profile);
  const double dc = std::abs(profile.values.sum());
  if (!(dc > 0.0)) throw NumericalFailure("fringe_contrast: empty profile");
  const auto n = static_cast<double>(profile.values.size());
  const double expected =
      std::abs(tau_ps) * units::kPico * n * profile.step / (2.0 * std::numbers::pi);
  const auto centre = static_cast<Eigen::Index>(std::llround(expected));
  const Eigen::Index lo = std::max<Eigen::Index>(1, centre - 1);
  const Eigen::Index hi = std::min<Eigen::Index>(spectrum.size() - 1, centre + 1);
  if (lo > hi) throw InvalidSpec("fringe_contrast: fringe frequency beyond Nyquist");
  return spectrum.segment(lo, hi - lo + 1).maxCoeff() / dc;
}

std::vector<EventPair> sample_events(const CsiMap& csi, std::size_t n_pairs,
                                     std::uint64_t seed, const DispersionSpec& spec) {
  spec.validate();
  const Eigen::Index rows = csi.intensity.rows();
  const Eigen::Index cols = csi.intensity.cols();
  std::vector<double> weights(static_cast<std::size_t>(rows * cols));
  double mass = 0.0;
  for (Eigen::Index j = 0; j < rows; ++j)
    for (Eigen::Index k = 0; k < cols; ++k) {
      const double v = csi.intensity(j, k);
      if (v < 0.0 || !std::isfinite(v)) throw InvalidSpec("sample_events: map must be non-negative");
      weights[static_cast<std::size_t>(j * cols + k)] = v;
      mass += v;
    }
  if (!(mass > 0.0)) throw InvalidSpec("sample_events: map has zero mass");
  if (n_pairs == 0) return {};

  std::vector<double> t1(static_cast<std::size_t>(rows));
  std::vector<double> t2(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < rows; ++j)
    t1[j] = wavelength_to_time(units::omega_to_wavelength_nm(csi.axis1.point(j)), spec);
  for (Eigen::Index k = 0; k < cols; ++k)
    t2[k] = wavelength_to_time(units::omega_to_wavelength_nm(csi.axis2.point(k)), spec);

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> cell(weights.begin(), weights.end());
  const double sigma_t = spec.jitter_fwhm_ps / kFwhmPerSigma;
  std::normal_distribution<double> jitter(0.0, sigma_t > 0.0 ? sigma_t : 1.0);

  std::vector<EventPair> out;
  out.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const std::size_t c = cell(rng);
    double a = t1[c / static_cast<std::size_t>(cols)];
    double b = t2[c % static_cast<std::size_t>(cols)];
    if (sigma_t > 0.0) {
      a += jitter(rng);
      b += jitter(rng);
    }
    out.push_back({{Channel::out1, a}, {Channel::out2, b}});
  }
  return out;
}

std::pair<std::ptrdiff_t, std::ptrdiff_t> Histogram2D::locate(double lambda1_nm,
                                                              double lambda2_nm) const {
  return {locate_in(edges1, lambda1_nm), locate_in(edges2, lambda2_nm)};
}

Histogram2D reconstruct_csi(std::span<const EventPair> events, const DispersionSpec& spec,
                            double bin_width_nm) {
  spec.validate();
  if (events.empty()) throw InvalidSpec("reconstruct_csi: no events");
  if (!(bin_width_nm > 0.0) || !std::isfinite(bin_width_nm))
    throw InvalidSpec("reconstruct_csi: bin width must be positive");

  std::vector<double> l1, l2;
  l1.reserve(events.size());
  l2.reserve(events.size());
  for (const EventPair& e : events) {
    l1.push_back(time_to_wavelength(e.first.arrival_time_ps, spec));
    l2.push_back(time_to_wavelength(e.second.arrival_time_ps, spec));
  }
  const auto [min1, max1] = std::minmax_element(l1.begin(), l1.end());
  const auto [min2, max2] = std::minmax_element(l2.begin(), l2.end());

  Histogram2D h;
  h.edges1 = make_edges(*min1, *max1, bin_width_nm);
  h.edges2 = make_edges(*min2, *max2, bin_width_nm);
  const std::size_t n1 = h.edges1.size() - 1;
  const std::size_t n2 = h.edges2.size() - 1;
  h.counts.setZero(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2));
  for (std::size_t i = 0; i < l1.size(); ++i) {
    const std::size_t a = bin_index(l1[i], h.edges1.front(), bin_width_nm, n1);
    const std::size_t b = bin_index(l2[i], h.edges2.front(), bin_width_nm, n2);
    ++h.counts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  }
  return h;
}

JointSpectralAmplitude filter_signal(const JointSpectralAmplitude& jsa, double width_nm,
                                     double center_nm) {
  jsa.require_normalized();
  if (std::isinf(width_nm) && width_nm > 0.0) return jsa;
  if (!(width_nm > 0.0)) throw InvalidSpec("filter width must be positive");
  const FrequencyGrid& g = jsa.grid_signal();
  const double bin_nm = g.spacing() / units::omega_per_nm(g.center_wavelength_nm());
  if (width_nm < 2.0 * bin_nm)
    throw InvalidSpec("filter width narrower than two grid bins");

  ComplexMatrix amp = jsa.amplitude();
  for (Eigen::Index j = 0; j < amp.rows(); ++j) {
    const double lambda = units::omega_to_wavelength_nm(g.point(static_cast<std::size_t>(j)));
    if (std::abs(lambda - center_nm) > 0.5 * width_nm) amp.row(j).setZero();
  }
  return {jsa.grid_signal(), jsa.grid_idler(), std::move(amp), true};
}

std::vector<WindowVisibility> window_filter_scan(const JointSpectralAmplitude& jsa1,
                                                 const JointSpectralAmplitude& jsa2,
                                                 std::span<const double> widths_nm) {
  const double center = jsa1.grid_signal().center_wavelength_nm();
  std::vector<WindowVisibility> out;
  out.reserve(widths_nm.size());
  for (double w : widths_nm) {
    const auto f1 = filter_signal(jsa1, w, center);
    const auto f2 = filter_signal(jsa2, w, center);
    out.push_back({w, fourfold_visibility(f1, f2)});
  }
  return out;
}

void write_events_csv(std::ostream& out, std::span<const EventPair> events) {
  out << "channel,arrival_time_ps\n";
  std::string line;
  for (const EventPair& e : events) {
    for (const EventRecord& r : {e.first, e.second}) {
      line = channel_name(r.channel);
      line += ',';
      csv::append_number(line, r.arrival_time_ps);
      line += '\n';
      out << line;
    }
  }
}

std::vector<EventPair> read_events_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "channel,arrival_time_ps")
    throw InvalidSpec("events file: missing header channel,arrival_time_ps");
  std::vector<EventRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw InvalidSpec("events file line " + std::to_string(line_no) + ": expected two fields");
    const std::string name = line.substr(0, comma);
    Channel c;
    if (name == "out1") c = Channel::out1;
    else if (name == "out2") c = Channel::out2;
    else throw InvalidSpec("events file line " + std::to_string(line_no) + ": unknown channel");
    double t = 0.0;
    try {
      std::size_t used = 0;
      t = std::stod(line.substr(comma + 1), &used);
      if (comma + 1 + used != line.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw InvalidSpec("events file line " + std::to_string(line_no) + ": bad time");
    }
    if (!std::isfinite(t))
      throw InvalidSpec("events file line " + std::to_string(line_no) + ": non-finite time");
    records.push_back({c, t});
  }
  if (records.size() % 2 != 0) throw InvalidSpec("events file: unpaired record");
  std::vector<EventPair> out;
  out.reserve(records.size() / 2);
  for (std::size_t i = 0; i < records.size(); i += 2) {
    if (records[i].channel != Channel::out1 || records[i + 1].channel != Channel::out2)
      throw InvalidSpec("events file: pairs must be out1 then out2");
    out.push_back({records[i], records[i + 1]});
  }
  return out;
}

void write_histogram_csv(std::ostream& out, const Histogram2D& hist) {
  out << "lambda1_nm,lambda2_nm,count\n";
  for (Eigen::Index a = 0; a < hist.counts.rows(); ++a) {
    const double c1 = 0.5 * (hist.edges1[a] + hist.edges1[a + 1]);
    for (Eigen::Index b = 0; b < hist.counts.cols(); ++b) {
      const double c2 = 0.5 * (hist.edges2[b] + hist.edges2[b + 1]);
      out << csv::row({c1, c2, static_cast<double>(hist.counts(a, b))});
    }
  }
}

void write_scan_csv(std::ostream& out, std::span<const WindowVisibility> scan) {
  out << "window_nm,visibility\n";
  for (const WindowVisibility& s : scan) out << csv::row({s.width_nm, s.visibility});
}

}  // namespace homsim
