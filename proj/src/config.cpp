#include "homsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "homsim/csv.hpp"

namespace homsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> to_real(std::string_view v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size() || std::isnan(out)) return std::nullopt;
  return out;
}

std::optional<std::uint64_t> to_unsigned(std::string_view v) {
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || end != v.data() + v.size() || v.empty()) return std::nullopt;
  return out;
}

std::optional<std::vector<double>> to_real_list(std::string_view v) {
  std::vector<double> out;
  while (true) {
    const auto comma = v.find(',');
    const auto item = trim(v.substr(0, comma));
    const auto x = to_real(item);
    if (!x) return std::nullopt;
    out.push_back(*x);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

std::optional<DipMode> to_mode(std::string_view v) {
  if (v == "fourfold") return DipMode::fourfold;
  if (v == "thermal") return DipMode::thermal;
  if (v == "twin") return DipMode::twin;
  return std::nullopt;
}

std::optional<bool> to_bool(std::string_view v) {
  if (v == "true") return true;
  if (v == "false") return false;
  return std::nullopt;
}

struct ParseState {
  RunConfig cfg;
  std::optional<std::vector<double>> windows_ns;
  std::optional<std::vector<double>> windows_nm;
  std::optional<Scenario> file_scenario;
  std::vector<std::string> errors;

  void fail(std::string_view key, const std::string& what) {
    errors.push_back(std::string(key) + ": " + what);
  }
};

using Apply = std::function<void(ParseState&, std::string_view key, std::string_view value)>;

struct Field {
  std::string key;
  std::string help;
  Apply apply;
};

enum class Range { any, positive, non_negative, unit_interval, half_open_unit };

bool in_range(double x, Range r) {
  switch (r) {
    case Range::any: return std::isfinite(x);
    case Range::positive: return std::isfinite(x) && x > 0.0;
    case Range::non_negative: return std::isfinite(x) && x >= 0.0;
    case Range::unit_interval: return x >= 0.0 && x <= 1.0;
    case Range::half_open_unit: return x > 0.0 && x <= 1.0;
  }
  return false;
}

const char* describe(Range r) {
  switch (r) {
    case Range::any: return "a finite number";
    case Range::positive: return "> 0";
    case Range::non_negative: return ">= 0";
    case Range::unit_interval: return "in [0, 1]";
    case Range::half_open_unit: return "in (0, 1]";
  }
  return "";
}

Apply real(double RunConfig::*member, Range r) {
  return [member, r](ParseState& st, std::string_view key, std::string_view v) {
    const auto x = to_real(v);
    if (!x) return st.fail(key, "expected a number, got '" + std::string(v) + "'");
    if (!in_range(*x, r))
      return st.fail(key, std::string("must be ") + describe(r) + " (got " + std::string(v) + ")");
    st.cfg.*member = *x;
  };
}

template <class Get>
Apply real_at(Get get, Range r) {
  return [get, r](ParseState& st, std::string_view key, std::string_view v) {
    const auto x = to_real(v);
    if (!x) return st.fail(key, "expected a number, got '" + std::string(v) + "'");
    if (!in_range(*x, r))
      return st.fail(key, std::string("must be ") + describe(r) + " (got " + std::string(v) + ")");
    get(st.cfg) = *x;
  };
}

template <class Get>
Apply count_at(Get get, std::uint64_t minimum) {
  return [get, minimum](ParseState& st, std::string_view key, std::string_view v) {
    const auto x = to_unsigned(v);
    if (!x) return st.fail(key, "expected a non-negative integer, got '" + std::string(v) + "'");
    if (*x < minimum)
      return st.fail(key, "must be >= " + std::to_string(minimum) + " (got " + std::string(v) + ")");
    get(st.cfg) = static_cast<std::remove_reference_t<decltype(get(st.cfg))>>(*x);
  };
}

template <class Get>
Apply mode_at(Get get) {
  return [get](ParseState& st, std::string_view key, std::string_view v) {
    const auto m = to_mode(v);
    if (!m) return st.fail(key, "expected fourfold, thermal or twin, got '" + std::string(v) + "'");
    get(st.cfg) = *m;
  };
}

template <class Get>
Apply flag_at(Get get) {
  return [get](ParseState& st, std::string_view key, std::string_view v) {
    const auto b = to_bool(v);
    if (!b) return st.fail(key, "expected true or false, got '" + std::string(v) + "'");
    get(st.cfg) = *b;
  };
}

Apply window_list(std::optional<std::vector<double>> ParseState::*member) {
  return [member](ParseState& st, std::string_view key, std::string_view v) {
    auto list = to_real_list(v);
    if (!list || list->empty())
      return st.fail(key, "expected a comma-separated list of numbers or inf");
    for (double w : *list)
      if (!(w > 0.0)) return st.fail(key, "windows must be > 0");
    st.*member = std::move(*list);
  };
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"scenario", "jsa | schmidt | dip | csi | multipair | filter-scan | sample | reconstruct",
                 [](ParseState& st, std::string_view key, std::string_view v) {
                   const auto s = parse_scenario(v);
                   if (!s) return st.fail(key, "unknown scenario '" + std::string(v) + "'");
                   st.file_scenario = *s;
                 }});
    f.push_back({"output.dir", "directory for CSV and metadata files",
                 [](ParseState& st, std::string_view key, std::string_view v) {
                   if (v.empty()) return st.fail(key, "must not be empty");
                   st.cfg.output_dir = std::filesystem::path(std::string(v));
                 }});

    f.push_back({"pump.center_wavelength_nm", "pump central wavelength",
                 real_at([](RunConfig& c) -> double& { return c.pump.center_wavelength_nm; }, Range::positive)});
    f.push_back({"pump.duration_fwhm_ps", "transform-limited pulse intensity FWHM",
                 real_at([](RunConfig& c) -> double& { return c.pump.duration_fwhm_ps; }, Range::positive)});
    f.push_back({"pump.shape", "gaussian",
                 [](ParseState& st, std::string_view key, std::string_view v) {
                   if (v != "gaussian") st.fail(key, "only 'gaussian' is supported");
                 }});

    f.push_back({"crystal.length_mm", "crystal length",
                 real_at([](RunConfig& c) -> double& { return c.crystal.length_mm; }, Range::positive)});
    f.push_back({"crystal.inverse_group_velocity_pump_ps_per_mm", "pump inverse group velocity",
                 real_at([](RunConfig& c) -> double& { return c.crystal.inverse_group_velocity_pump; }, Range::any)});
    f.push_back({"crystal.inverse_group_velocity_signal_ps_per_mm", "signal inverse group velocity",
                 real_at([](RunConfig& c) -> double& { return c.crystal.inverse_group_velocity_signal; }, Range::any)});
    f.push_back({"crystal.inverse_group_velocity_idler_ps_per_mm", "idler inverse group velocity",
                 real_at([](RunConfig& c) -> double& { return c.crystal.inverse_group_velocity_idler; }, Range::any)});
    f.push_back({"crystal.phase_matching", "sinc | gaussian_approx",
                 [](ParseState& st, std::string_view key, std::string_view v) {
                   if (v == "sinc") st.cfg.crystal.phase_matching = PhaseMatching::sinc;
                   else if (v == "gaussian_approx") st.cfg.crystal.phase_matching = PhaseMatching::gaussian_approx;
                   else st.fail(key, "expected sinc or gaussian_approx, got '" + std::string(v) + "'");
                 }});

    f.push_back({"grid.center_wavelength_nm", "center of the signal and idler grids",
                 real(&RunConfig::grid_center_wavelength_nm, Range::positive)});
    f.push_back({"grid.span_nm", "wavelength span of each grid",
                 real(&RunConfig::grid_span_nm, Range::positive)});
    f.push_back({"grid.points", "points per grid axis",
                 count_at([](RunConfig& c) -> std::size_t& { return c.grid_points; }, 2)});

    f.push_back({"schmidt.modes", "retained Schmidt modes (0 = all)",
                 count_at([](RunConfig& c) -> std::size_t& { return c.schmidt_modes; }, 0)});

    f.push_back({"dip.mode", "fourfold | thermal | twin",
                 mode_at([](RunConfig& c) -> DipMode& { return c.dip.mode; })});
    f.push_back({"dip.delay_min_ps", "first delay of the scan",
                 real_at([](RunConfig& c) -> double& { return c.dip.delay_min_ps; }, Range::any)});
    f.push_back({"dip.delay_max_ps", "last delay of the scan",
                 real_at([](RunConfig& c) -> double& { return c.dip.delay_max_ps; }, Range::any)});
    f.push_back({"dip.delay_points", "number of delays",
                 count_at([](RunConfig& c) -> std::size_t& { return c.dip.delay_points; }, 2)});

    f.push_back({"csi.mode", "fourfold | thermal | twin",
                 mode_at([](RunConfig& c) -> DipMode& { return c.csi.mode; })});
    f.push_back({"csi.tau_ps", "delay of the map",
                 real_at([](RunConfig& c) -> double& { return c.csi.tau_ps; }, Range::any)});
    f.push_back({"csi.smear", "blur the map by the spectrometer resolution",
                 flag_at([](RunConfig& c) -> bool& { return c.csi.smear; })});

    f.push_back({"multipair.mean_photon_number", "mean pair number per pulse",
                 real_at([](RunConfig& c) -> double& { return c.multipair.model.mean_photon_number; }, Range::positive)});
    f.push_back({"multipair.efficiency", "overall detection efficiency",
                 real_at([](RunConfig& c) -> double& { return c.multipair.model.efficiency; }, Range::half_open_unit)});
    f.push_back({"multipair.mode_match", "temporal overlap at zero delay",
                 real_at([](RunConfig& c) -> double& { return c.multipair.model.mode_match; }, Range::unit_interval)});
    f.push_back({"multipair.renormalize", "rescale the eigenvalues to sum to one",
                 flag_at([](RunConfig& c) -> bool& { return c.multipair.model.renormalize; })});
    f.push_back({"multipair.eigenvalues", "comma-separated list, or 'source'",
                 [](ParseState& st, std::string_view key, std::string_view v) {
                   if (v == "source") {
                     st.cfg.multipair.eigenvalues_from_source = true;
                     return;
                   }
                   auto list = to_real_list(v);
                   if (!list || list->empty()) return st.fail(key, "expected a list of numbers or 'source'");
                   double total = 0.0;
                   for (double l : *list) {
                     if (!(l >= 0.0) || !std::isfinite(l)) return st.fail(key, "eigenvalues must be >= 0");
                     total += l;
                   }
                   if (!(total > 0.0)) return st.fail(key, "eigenvalues must not all be zero");
                   st.cfg.multipair.eigenvalues_from_source = false;
                   st.cfg.multipair.model.schmidt_eigenvalues = std::move(*list);
                 }});
    f.push_back({"multipair.sweep_mean_photon_numbers", "additional mean pair numbers to report",
                 [](ParseState& st, std::string_view key, std::string_view v) {
                   auto list = to_real_list(v);
                   if (!list) return st.fail(key, "expected a comma-separated list of numbers");
                   for (double n : *list)
                     if (!(n > 0.0) || !std::isfinite(n)) return st.fail(key, "values must be > 0");
                   st.cfg.multipair.sweep_mean_photon_numbers = std::move(*list);
                 }});

    f.push_back({"filter.windows_ns", "coincidence windows, converted to nm (inf = no filter)",
                 window_list(&ParseState::windows_ns)});
    f.push_back({"filter.windows_nm", "filter widths in nm (inf = no filter)",
                 window_list(&ParseState::windows_nm)});

    f.push_back({"spectrometer.dispersion_ps_per_km_nm", "fiber dispersion",
                 real_at([](RunConfig& c) -> double& { return c.spectrometer.dispersion_ps_per_km_nm; }, Range::any)});
    f.push_back({"spectrometer.fiber_length_km", "fiber length",
                 real_at([](RunConfig& c) -> double& { return c.spectrometer.fiber_length_km; }, Range::positive)});
    f.push_back({"spectrometer.jitter_fwhm_ps", "detector timing jitter",
                 real_at([](RunConfig& c) -> double& { return c.spectrometer.jitter_fwhm_ps; }, Range::non_negative)});
    f.push_back({"spectrometer.reference_wavelength_nm", "wavelength of zero arrival time",
                 real_at([](RunConfig& c) -> double& { return c.spectrometer.reference_wavelength_nm; }, Range::positive)});
    f.push_back({"spectrometer.window_factor", "ps of window per (D*L ps) of spectral width",
                 real(&RunConfig::window_factor, Range::positive)});

    f.push_back({"sample.mode", "fourfold | thermal | twin",
                 mode_at([](RunConfig& c) -> DipMode& { return c.sample.mode; })});
    f.push_back({"sample.tau_ps", "delay of the sampled map",
                 real_at([](RunConfig& c) -> double& { return c.sample.tau_ps; }, Range::any)});
    f.push_back({"sample.n_pairs", "number of coincidence pairs",
                 count_at([](RunConfig& c) -> std::size_t& { return c.sample.n_pairs; }, 1)});
    f.push_back({"sample.seed", "64-bit random seed",
                 count_at([](RunConfig& c) -> std::uint64_t& { return c.sample.seed; }, 0)});

    f.push_back({"reconstruct.events_file", "time-tag CSV to histogram",
                 [](ParseState& st, std::string_view key, std::string_view v) {
                   if (v.empty()) return st.fail(key, "must not be empty");
                   st.cfg.reconstruct.events_file = std::filesystem::path(std::string(v));
                 }});
    f.push_back({"reconstruct.bin_width_nm", "histogram bin width",
                 real_at([](RunConfig& c) -> double& { return c.reconstruct.bin_width_nm; }, Range::positive)});
    return f;
  }();
  return table;
}

template <class Fn>
void collect(ParseState& st, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    st.errors.emplace_back(e.what());
  }
}

void validate_cross_fields(ParseState& st) {
  RunConfig& c = st.cfg;
  collect(st, [&] { c.pump.validate(); });
  collect(st, [&] { c.crystal.validate(); });
  collect(st, [&] { c.spectrometer.validate(); });

  std::optional<FrequencyGrid> grid;
  try {
    grid = c.grid();
  } catch (const Error& e) {
    st.fail("grid", e.what());
  }

  auto check_delay = [&](std::string_view key, double tau) {
    if (grid && !grid->admits_delay(tau))
      st.fail(key, "delay " + csv::format_number(tau) + " ps aliases on the frequency grid");
  };

  switch (c.scenario) {
    case Scenario::dip:
      if (!(c.dip.delay_max_ps > c.dip.delay_min_ps))
        st.fail("dip.delay_max_ps", "must exceed dip.delay_min_ps");
      check_delay("dip.delay_min_ps", c.dip.delay_min_ps);
      check_delay("dip.delay_max_ps", c.dip.delay_max_ps);
      break;
    case Scenario::csi:
      check_delay("csi.tau_ps", c.csi.tau_ps);
      break;
    case Scenario::sample:
      check_delay("sample.tau_ps", c.sample.tau_ps);
      break;
    case Scenario::reconstruct:
      if (c.reconstruct.events_file.empty())
        st.fail("reconstruct.events_file", "required for the reconstruct scenario");
      break;
    case Scenario::filter_scan: {
      if (st.windows_ns && st.windows_nm) {
        st.fail("filter.windows_nm", "set either filter.windows_ns or filter.windows_nm, not both");
        break;
      }
      if (st.windows_nm) {
        c.filter_windows_nm = *st.windows_nm;
      } else {
        const std::vector<double> ns =
            st.windows_ns ? *st.windows_ns : std::vector<double>{kNoFilter, 5.0, 2.0, 1.0};
        c.filter_windows_nm.clear();
        for (double w : ns) {
          if (std::isinf(w)) {
            c.filter_windows_nm.push_back(kNoFilter);
            continue;
          }
          try {
            c.filter_windows_nm.push_back(window_to_bandwidth(w, c.spectrometer, c.window_factor));
          } catch (const Error& e) {
            st.fail("filter.windows_ns", e.what());
            break;
          }
        }
      }
      if (grid) {
        const double bin_nm = grid->spacing() / units::omega_per_nm(grid->center_wavelength_nm());
        for (double w : c.filter_windows_nm)
          if (w < 2.0 * bin_nm)
            st.fail("filter", "window " + csv::format_number(w) +
                                  " nm is narrower than two grid bins (" +
                                  csv::format_number(2.0 * bin_nm) + " nm)");
      }
      break;
    }
    case Scenario::multipair:
      if (!c.multipair.eigenvalues_from_source) collect(st, [&] { c.multipair.model.validate(); });
      break;
    case Scenario::jsa:
    case Scenario::schmidt:
      break;
  }
}

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::jsa: return "jsa";
    case Scenario::schmidt: return "schmidt";
    case Scenario::dip: return "dip";
    case Scenario::csi: return "csi";
    case Scenario::multipair: return "multipair";
    case Scenario::filter_scan: return "filter-scan";
    case Scenario::sample: return "sample";
    case Scenario::reconstruct: return "reconstruct";
  }
  return "?";
}

std::optional<Scenario> parse_scenario(std::string_view name) {
  for (Scenario s : {Scenario::jsa, Scenario::schmidt, Scenario::dip, Scenario::csi,
                     Scenario::multipair, Scenario::filter_scan, Scenario::sample,
                     Scenario::reconstruct})
    if (name == to_string(s)) return s;
  return std::nullopt;
}

FrequencyGrid RunConfig::grid() const {
  return FrequencyGrid::around_wavelength(grid_center_wavelength_nm, grid_span_nm, grid_points);
}

std::string RunConfig::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical_text()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

ConfigError::ConfigError(std::vector<std::string> messages)
    : Error([&] {
        std::string s = "invalid configuration:";
        for (const auto& m : messages) s += "\n  " + m;
        return s;
      }()),
      messages_(std::move(messages)) {}

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides) {
  ParseState st;
  std::map<std::string, std::string> entries;

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      st.errors.push_back(where + ": expected 'key = value'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      st.errors.push_back(where + ": missing key");
      continue;
    }
    if (!entries.emplace(key, value).second) st.errors.push_back(where + ": duplicate key '" + key + "'");
  }

  // Command-line values replace file values before validation.
  if (overrides.output_dir) entries["output.dir"] = overrides.output_dir->string();
  if (overrides.seed) entries["sample.seed"] = std::to_string(*overrides.seed);

  const auto& table = fields();
  for (const auto& [key, value] : entries) {
    const auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) {
      st.errors.push_back(key + ": unknown key");
      continue;
    }
    it->apply(st, key, value);
  }

  if (overrides.scenario && st.file_scenario && *overrides.scenario != *st.file_scenario)
    st.fail("scenario", std::string("file requests '") + to_string(*st.file_scenario) +
                            "' but the command line requests '" + to_string(*overrides.scenario) + "'");
  if (overrides.scenario) st.cfg.scenario = *overrides.scenario;
  else if (st.file_scenario) st.cfg.scenario = *st.file_scenario;
  else st.fail("scenario", "not set");
  entries["scenario"] = to_string(st.cfg.scenario);

  validate_cross_fields(st);
  if (!st.errors.empty()) throw ConfigError(std::move(st.errors));
  st.cfg.entries = std::move(entries);
  return st.cfg;
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file " + path.string());
  return parse_config(text.str(), overrides);
}

std::vector<std::pair<std::string, std::string>> config_keys() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : fields()) out.emplace_back(f.key, f.help);
  return out;
}

}  // namespace homsim
