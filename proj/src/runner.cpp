#include "homsim/runner.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "homsim/csv.hpp"
#include "homsim/schmidt.hpp"

#ifndef HOMSIM_VERSION
#define HOMSIM_VERSION "0.0.0"
#endif

namespace homsim {

namespace {

using nlohmann::ordered_json;

struct Output {
  std::string file;
  std::string content;
  std::vector<std::string> columns;
  std::string gnuplot;
};

ordered_json source_json(const RunConfig& cfg) {
  return {
      {"pump", {{"center_wavelength_nm", cfg.pump.center_wavelength_nm},
                {"duration_fwhm_ps", cfg.pump.duration_fwhm_ps},
                {"shape", "gaussian"}}},
      {"crystal", {{"length_mm", cfg.crystal.length_mm},
                   {"inverse_group_velocity_pump_ps_per_mm", cfg.crystal.inverse_group_velocity_pump},
                   {"inverse_group_velocity_signal_ps_per_mm", cfg.crystal.inverse_group_velocity_signal},
                   {"inverse_group_velocity_idler_ps_per_mm", cfg.crystal.inverse_group_velocity_idler},
                   {"phase_matching", cfg.crystal.phase_matching == PhaseMatching::sinc ? "sinc"
                                                                                        : "gaussian_approx"}}},
      {"grid", {{"center_wavelength_nm", cfg.grid_center_wavelength_nm},
                {"span_nm", cfg.grid_span_nm},
                {"points", cfg.grid_points}}},
  };
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

CsiMap csi_for(const JointSpectralAmplitude& jsa, DipMode mode, double tau_ps) {
  switch (mode) {
    case DipMode::fourfold: return fourfold_csi(jsa, jsa, tau_ps);
    case DipMode::thermal: return thermal_csi(jsa, tau_ps);
    case DipMode::twin: return twin_csi(jsa, tau_ps);
  }
  throw InvalidSpec("unknown dip mode");
}

CsiMap background_for(const JointSpectralAmplitude& jsa, DipMode mode) {
  switch (mode) {
    case DipMode::fourfold: return fourfold_csi_background(jsa, jsa);
    case DipMode::thermal: return thermal_csi_background(jsa);
    case DipMode::twin: return twin_csi_background(jsa);
  }
  throw InvalidSpec("unknown dip mode");
}

Output run_dip(const RunConfig& cfg, const JointSpectralAmplitude& jsa, RunResult& res) {
  const DelayScan scan =
      DelayScan::linspace(cfg.dip.delay_min_ps, cfg.dip.delay_max_ps, cfg.dip.delay_points);
  DipCurve curve;
  switch (cfg.dip.mode) {
    case DipMode::fourfold: curve = fourfold_dip(jsa, jsa, scan); break;
    case DipMode::thermal: {
      ThermalDip t = thermal_dip(jsa, scan);
      res.summary.emplace_back("A", t.kernels.A);
      res.summary.emplace_back("E", t.kernels.E);
      curve = std::move(t.curve);
      break;
    }
    case DipMode::twin: curve = twin_dip(jsa, scan); break;
  }
  res.summary.emplace_back("visibility", visibility(curve));
  res.summary.emplace_back("fwhm_ps", fwhm(curve));
  std::ostringstream out;
  write_dip_csv(out, curve);
  return {"dip.csv", out.str(), {"tau_ps", "probability"}, "set datafile separator ','; plot 'dip.csv' using 1:2 with lines"};
}

Output run_csi(const RunConfig& cfg, const JointSpectralAmplitude& jsa, RunResult& res) {
  CsiMap map = csi_for(jsa, cfg.csi.mode, cfg.csi.tau_ps);
  CsiMap background = background_for(jsa, cfg.csi.mode);
  res.summary.emplace_back("quarter_total", 0.25 * map.total());
  res.summary.emplace_back("clamped_entries", static_cast<double>(map.clamped));
  if (cfg.csi.smear) {
    map = smear_csi(map, cfg.spectrometer);
    background = smear_csi(background, cfg.spectrometer);
  }
  res.summary.emplace_back(
      "dominant_fringe_bin",
      static_cast<double>(dominant_fringe_bin(antidiagonal_profile(map, background))));
  std::ostringstream out;
  write_csi_csv(out, map);
  return {"csi.csv", out.str(), {"lambda1_nm", "lambda2_nm", "intensity"},
          "set datafile separator ','; splot 'csi.csv' using 1:2:3 with pm3d"};
}

Output run_multipair(const RunConfig& cfg, RunResult& res) {
  MultipairConfig model = cfg.multipair.model;
  if (cfg.multipair.eigenvalues_from_source) {
    const auto jsa = build_jsa(cfg.pump, cfg.crystal, cfg.grid(), cfg.grid());
    model.schmidt_eigenvalues = decompose(jsa, cfg.schmidt_modes).retained(false);
  }
  std::vector<MultipairReport> rows;
  rows.push_back(multipair_report(model));
  for (double nbar : cfg.multipair.sweep_mean_photon_numbers) {
    MultipairConfig m = model;
    m.mean_photon_number = nbar;
    rows.push_back(multipair_report(m));
  }
  res.summary.emplace_back("V", rows.front().V);
  res.summary.emplace_back("r", rows.front().r);
  std::ostringstream out;
  write_multipair_csv(out, rows);
  return {"multipair.csv", out.str(), {"nbar", "eta", "xi", "p", "r", "P_mean", "P_min", "V"},
          "set datafile separator ','; plot 'multipair.csv' using 1:8 with linespoints"};
}

Output run_filter_scan(const RunConfig& cfg, const JointSpectralAmplitude& jsa, RunResult& res) {
  const auto scan = window_filter_scan(jsa, jsa, cfg.filter_windows_nm);
  for (const auto& s : scan)
    res.summary.emplace_back("visibility_" + csv::format_number(s.width_nm) + "nm", s.visibility);
  std::ostringstream out;
  write_scan_csv(out, scan);
  return {"filter_scan.csv", out.str(), {"window_nm", "visibility"},
          "set datafile separator ','; plot 'filter_scan.csv' using 1:2 with linespoints"};
}

Output run_sample(const RunConfig& cfg, const JointSpectralAmplitude& jsa, RunResult& res) {
  const CsiMap map = csi_for(jsa, cfg.sample.mode, cfg.sample.tau_ps);
  const auto events = sample_events(map, cfg.sample.n_pairs, cfg.sample.seed, cfg.spectrometer);
  res.summary.emplace_back("n_pairs", static_cast<double>(events.size()));
  std::ostringstream out;
  write_events_csv(out, events);
  return {"events.csv", out.str(), {"channel", "arrival_time_ps"}, ""};
}

Output run_reconstruct(const RunConfig& cfg, RunResult& res) {
  std::ifstream in(cfg.reconstruct.events_file, std::ios::binary);
  if (!in) throw IoError("cannot read events file " + cfg.reconstruct.events_file.string());
  const auto events = read_events_csv(in);
  if (in.bad()) throw IoError("error reading events file " + cfg.reconstruct.events_file.string());
  const Histogram2D h = reconstruct_csi(events, cfg.spectrometer, cfg.reconstruct.bin_width_nm);
  res.summary.emplace_back("events", static_cast<double>(h.total()));
  std::ostringstream out;
  write_histogram_csv(out, h);
  return {"histogram.csv", out.str(), {"lambda1_nm", "lambda2_nm", "count"},
          "set datafile separator ','; splot 'histogram.csv' using 1:2:3 with pm3d"};
}

Output dispatch(const RunConfig& cfg, RunResult& res) {
  switch (cfg.scenario) {
    case Scenario::multipair: return run_multipair(cfg, res);
    case Scenario::reconstruct: return run_reconstruct(cfg, res);
    default: break;
  }
  const FrequencyGrid grid = cfg.grid();
  const auto jsa = build_jsa(cfg.pump, cfg.crystal, grid, grid);
  switch (cfg.scenario) {
    case Scenario::jsa: {
      res.summary.emplace_back("purity", reduced_kernel(jsa, Axis::idler).purity());
      std::ostringstream out;
      write_jsa_csv(out, jsa);
      return {"jsa.csv", out.str(), {"omega_s", "omega_i", "re", "im"},
              "set datafile separator ','; splot 'jsa.csv' using 1:2:($3**2+$4**2) with pm3d"};
    }
    case Scenario::schmidt: {
      const auto dec = decompose(jsa, cfg.schmidt_modes);
      res.summary.emplace_back("purity", purity(dec));
      res.summary.emplace_back("lambda_1", dec.eigenvalues[0]);
      std::ostringstream out;
      write_eigenvalues_csv(out, dec);
      return {"schmidt_eigenvalues.csv", out.str(), {"index", "lambda"},
              "set datafile separator ','; plot 'schmidt_eigenvalues.csv' using 1:2 with impulses"};
    }
    case Scenario::dip: return run_dip(cfg, jsa, res);
    case Scenario::csi: return run_csi(cfg, jsa, res);
    case Scenario::filter_scan: return run_filter_scan(cfg, jsa, res);
    case Scenario::sample: return run_sample(cfg, jsa, res);
    default: break;
  }
  throw InvalidSpec("unhandled scenario");
}

}  // namespace

const char* version() { return HOMSIM_VERSION; }

RunResult run(const RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();

  RunResult res;
  Output output = dispatch(cfg, res);

  std::error_code ec;
  std::filesystem::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir.string() + ": " + ec.message());

  const auto csv_path = cfg.output_dir / output.file;
  csv::write_file_atomic(csv_path, output.content);
  res.files.push_back(csv_path);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ordered_json columns = ordered_json::object();
  for (std::size_t i = 0; i < output.columns.size(); ++i) columns[output.columns[i]] = i + 1;
  ordered_json results = ordered_json::object();
  for (const auto& [k, v] : res.summary) results[k] = v;

  ordered_json meta = {
      {"scenario", to_string(cfg.scenario)},
      {"homsim_version", version()},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                            "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"compiler", __VERSION__},
      {"config_hash", "fnv1a64:" + hex(cfg.hash())},
      {"config", cfg.entries},
      {"wall_time_s", wall},
      {"source", source_json(cfg)},
      {"output", {{"file", output.file}, {"columns", columns}, {"gnuplot", output.gnuplot}}},
      {"results", results},
  };
  if (cfg.scenario == Scenario::sample) meta["seed"] = cfg.sample.seed;

  const auto meta_path =
      cfg.output_dir / (std::filesystem::path(output.file).stem().string() + ".meta.json");
  csv::write_file_atomic(meta_path, meta.dump(2) + "\n");
  res.files.push_back(meta_path);
  return res;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidSpec*>(&e)) return 2;
  if (dynamic_cast<const NumericalFailure*>(&e)) return 3;
  if (dynamic_cast<const IoError*>(&e)) return 4;
  return 1;
}

}  // namespace homsim
