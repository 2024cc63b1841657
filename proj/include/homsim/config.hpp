#pragma once

// Run configuration: a flat `section.key = value` text format. Lines starting
// with '#' are comments. Every physical quantity carries its unit in the key
// name. Unknown keys, duplicates and out-of-range values are all reported
// together.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "homsim/interference.hpp"
#include "homsim/multipair.hpp"
#include "homsim/spdc.hpp"
#include "homsim/spectrometer.hpp"

namespace homsim {

enum class Scenario { jsa, schmidt, dip, csi, multipair, filter_scan, sample, reconstruct };

const char* to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view name);

struct DipSettings {
  DipMode mode = DipMode::fourfold;
  double delay_min_ps = -25.0;
  double delay_max_ps = 25.0;
  std::size_t delay_points = 101;
};

struct CsiSettings {
  DipMode mode = DipMode::fourfold;
  double tau_ps = 0.0;
  bool smear = false;
};

struct MultipairSettings {
  MultipairConfig model;
  /// Take the eigenvalues from the configured source instead of the list.
  bool eigenvalues_from_source = false;
  /// Extra mean photon numbers reported after the configured one.
  std::vector<double> sweep_mean_photon_numbers;
};

struct SampleSettings {
  DipMode mode = DipMode::fourfold;
  double tau_ps = 0.0;
  std::size_t n_pairs = 1'000'000;
  std::uint64_t seed = 1;
};

struct ReconstructSettings {
  std::filesystem::path events_file;
  double bin_width_nm = 0.1;
};

struct RunConfig {
  Scenario scenario = Scenario::dip;

  PumpSpec pump;
  CrystalSpec crystal;
  double grid_center_wavelength_nm = SourceDefaults::kDegenerateWavelengthNm;
  double grid_span_nm = SourceDefaults::kGridSpanNm;
  std::size_t grid_points = SourceDefaults::kGridPoints;

  std::size_t schmidt_modes = 5;
  DipSettings dip;
  CsiSettings csi;
  MultipairSettings multipair;
  /// Filter widths in nm after window conversion; kNoFilter for none.
  std::vector<double> filter_windows_nm;
  DispersionSpec spectrometer;
  double window_factor = 2.0;
  SampleSettings sample;
  ReconstructSettings reconstruct;

  std::filesystem::path output_dir = ".";

  /// Effective key/value pairs (file entries plus overrides), sorted.
  std::map<std::string, std::string> entries;

  FrequencyGrid grid() const;
  /// FNV-1a 64 of the canonical entries text.
  std::uint64_t hash() const;
  std::string canonical_text() const;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

/// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<Scenario> scenario;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
};

/// Throws ConfigError carrying every problem found.
RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});

/// Reads and parses a file. Throws IoError if it cannot be read.
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Every recognized key with a one-line description, for --help output.
std::vector<std::pair<std::string, std::string>> config_keys();

}  // namespace homsim
