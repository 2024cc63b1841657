#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "homsim/config.hpp"
#include "homsim/interference.hpp"
#include "homsim/multipair.hpp"
#include "homsim/parallel.hpp"
#include "homsim/runner.hpp"
#include "homsim/schmidt.hpp"
#include "homsim/spdc.hpp"
#include "homsim/spectrometer.hpp"

namespace py = pybind11;
using namespace homsim;

namespace {

DelayScan to_scan(std::vector<double> delays) { return DelayScan(std::move(delays)); }

void bind_source(py::module_& m) {
  py::class_<FrequencyGrid>(m, "FrequencyGrid")
      .def(py::init<double, double, std::size_t>(), py::arg("center"), py::arg("span"),
           py::arg("n_points"))
      .def_static("around_wavelength", &FrequencyGrid::around_wavelength, py::arg("center_nm"),
                  py::arg("span_nm"), py::arg("n_points"))
      .def_property_readonly("center", &FrequencyGrid::center)
      .def_property_readonly("span", &FrequencyGrid::span)
      .def_property_readonly("spacing", &FrequencyGrid::spacing)
      .def_property_readonly("center_wavelength_nm", &FrequencyGrid::center_wavelength_nm)
      .def("__len__", &FrequencyGrid::size)
      .def("points", &FrequencyGrid::points)
      .def("offsets", &FrequencyGrid::offsets)
      .def("admits_delay", &FrequencyGrid::admits_delay, py::arg("tau_ps"));

  py::enum_<PhaseMatching>(m, "PhaseMatching")
      .value("sinc", PhaseMatching::sinc)
      .value("gaussian_approx", PhaseMatching::gaussian_approx);

  py::class_<PumpSpec>(m, "PumpSpec")
      .def(py::init<>())
      .def_readwrite("center_wavelength_nm", &PumpSpec::center_wavelength_nm)
      .def_readwrite("duration_fwhm_ps", &PumpSpec::duration_fwhm_ps)
      .def("sigma_omega", &PumpSpec::sigma_omega)
      .def("frequency_fwhm_hz", &PumpSpec::frequency_fwhm_hz);

  py::class_<CrystalSpec>(m, "CrystalSpec")
      .def(py::init<>())
      .def_readwrite("length_mm", &CrystalSpec::length_mm)
      .def_readwrite("inverse_group_velocity_pump", &CrystalSpec::inverse_group_velocity_pump)
      .def_readwrite("inverse_group_velocity_signal", &CrystalSpec::inverse_group_velocity_signal)
      .def_readwrite("inverse_group_velocity_idler", &CrystalSpec::inverse_group_velocity_idler)
      .def_readwrite("phase_matching", &CrystalSpec::phase_matching);

  py::enum_<Axis>(m, "Axis").value("signal", Axis::signal).value("idler", Axis::idler);

  py::class_<JointSpectralAmplitude>(m, "JointSpectralAmplitude")
      .def(py::init<FrequencyGrid, FrequencyGrid, ComplexMatrix, bool>(), py::arg("signal"),
           py::arg("idler"), py::arg("amplitude"), py::arg("normalize") = true)
      .def_property_readonly("grid_signal", &JointSpectralAmplitude::grid_signal)
      .def_property_readonly("grid_idler", &JointSpectralAmplitude::grid_idler)
      .def_property_readonly("amplitude", &JointSpectralAmplitude::amplitude)
      .def("norm_squared", &JointSpectralAmplitude::norm_squared)
      .def("swapped", &JointSpectralAmplitude::swapped);

  py::class_<SpectralKernel>(m, "SpectralKernel")
      .def_readonly("grid", &SpectralKernel::grid)
      .def_readonly("kernel", &SpectralKernel::kernel)
      .def("trace", &SpectralKernel::trace)
      .def("purity", &SpectralKernel::purity);

  m.def("build_jsa", &build_jsa, py::arg("pump"), py::arg("crystal"), py::arg("grid_signal"),
        py::arg("grid_idler"));
  m.def("default_jsa", &SourceDefaults::jsa, py::arg("n_points") = SourceDefaults::kGridPoints);
  m.def("reduced_kernel", &reduced_kernel, py::arg("jsa"), py::arg("trace_out") = Axis::idler);
  m.def("marginal_spectrum", &marginal_spectrum, py::arg("jsa"), py::arg("which"));

  py::class_<SchmidtDecomposition>(m, "SchmidtDecomposition")
      .def_readonly("eigenvalues", &SchmidtDecomposition::eigenvalues)
      .def_readonly("signal_modes", &SchmidtDecomposition::signal_modes)
      .def_readonly("idler_modes", &SchmidtDecomposition::idler_modes)
      .def_readonly("truncation", &SchmidtDecomposition::truncation)
      .def("retained", &SchmidtDecomposition::retained, py::arg("renormalize") = false)
      .def("reconstruct", &SchmidtDecomposition::reconstruct);
  m.def("decompose", &decompose, py::arg("jsa"), py::arg("k") = 5);
  m.def("purity", &purity, py::arg("decomposition"));
}

void bind_interference(py::module_& m) {
  py::enum_<DipMode>(m, "DipMode")
      .value("fourfold", DipMode::fourfold)
      .value("thermal", DipMode::thermal)
      .value("twin", DipMode::twin);

  py::class_<DipCurve>(m, "DipCurve")
      .def_readonly("delays_ps", &DipCurve::delays_ps)
      .def_readonly("probability", &DipCurve::probability)
      .def_readonly("mode", &DipCurve::mode)
      .def_readonly("asymptote", &DipCurve::asymptote);

  py::class_<ThermalKernels>(m, "ThermalKernels")
      .def_readonly("A", &ThermalKernels::A)
      .def_readonly("E", &ThermalKernels::E)
      .def_readonly("E_tau", &ThermalKernels::E_tau);

  py::class_<ThermalDip>(m, "ThermalDip")
      .def_readonly("curve", &ThermalDip::curve)
      .def_readonly("kernels", &ThermalDip::kernels);

  py::class_<CsiMap>(m, "CsiMap")
      .def_readonly("axis1", &CsiMap::axis1)
      .def_readonly("axis2", &CsiMap::axis2)
      .def_readonly("intensity", &CsiMap::intensity)
      .def_readonly("tau_ps", &CsiMap::tau_ps)
      .def_readonly("clamped", &CsiMap::clamped)
      .def("total", &CsiMap::total);

  m.def("fourfold_dip", [](const JointSpectralAmplitude& a, const JointSpectralAmplitude& b,
                           std::vector<double> delays) { return fourfold_dip(a, b, to_scan(delays)); },
        py::arg("jsa1"), py::arg("jsa2"), py::arg("delays_ps"));
  m.def("fourfold_probability", &fourfold_probability, py::arg("jsa1"), py::arg("jsa2"),
        py::arg("tau_ps"));
  m.def("fourfold_visibility", &fourfold_visibility, py::arg("jsa1"), py::arg("jsa2"));
  m.def("fourfold_csi", &fourfold_csi, py::arg("jsa1"), py::arg("jsa2"), py::arg("tau_ps"));
  m.def("thermal_dip", [](const JointSpectralAmplitude& a, std::vector<double> delays) {
        return thermal_dip(a, to_scan(delays)); }, py::arg("jsa"), py::arg("delays_ps"));
  m.def("thermal_csi", &thermal_csi, py::arg("jsa"), py::arg("tau_ps"));
  m.def("twin_dip", [](const JointSpectralAmplitude& a, std::vector<double> delays) {
        return twin_dip(a, to_scan(delays)); }, py::arg("jsa"), py::arg("delays_ps"));
  m.def("twin_csi", &twin_csi, py::arg("jsa"), py::arg("tau_ps"));
  m.def("visibility", &visibility, py::arg("curve"));
  m.def("fwhm", &fwhm, py::arg("curve"));
}

void bind_multipair(py::module_& m) {
  py::class_<MultipairConfig>(m, "MultipairConfig")
      .def(py::init<>())
      .def_readwrite("mean_photon_number", &MultipairConfig::mean_photon_number)
      .def_readwrite("efficiency", &MultipairConfig::efficiency)
      .def_readwrite("schmidt_eigenvalues", &MultipairConfig::schmidt_eigenvalues)
      .def_readwrite("mode_match", &MultipairConfig::mode_match)
      .def_readwrite("renormalize", &MultipairConfig::renormalize)
      .def("effective_eigenvalues", &MultipairConfig::effective_eigenvalues);

  py::class_<MultipairReport>(m, "MultipairReport")
      .def_readonly("nbar", &MultipairReport::nbar)
      .def_readonly("eta", &MultipairReport::eta)
      .def_readonly("xi", &MultipairReport::xi)
      .def_readonly("p", &MultipairReport::p)
      .def_readonly("r", &MultipairReport::r)
      .def_readonly("P_mean", &MultipairReport::P_mean)
      .def_readonly("P_min", &MultipairReport::P_min)
      .def_readonly("V", &MultipairReport::V);

  m.def("multipair_report", &multipair_report, py::arg("config"));
  m.def("multipair_visibility", &multipair_visibility, py::arg("config"));
  m.def("pair_probability", [](double r, std::vector<double> ev) { return pair_probability(r, ev); },
        py::arg("r"), py::arg("eigenvalues"));
  m.def("solve_r", [](double p, std::vector<double> ev) { return solve_r(p, ev); }, py::arg("p"),
        py::arg("eigenvalues"));
}

void bind_spectrometer(py::module_& m) {
  py::class_<DispersionSpec>(m, "DispersionSpec")
      .def(py::init<>())
      .def_readwrite("dispersion_ps_per_km_nm", &DispersionSpec::dispersion_ps_per_km_nm)
      .def_readwrite("fiber_length_km", &DispersionSpec::fiber_length_km)
      .def_readwrite("jitter_fwhm_ps", &DispersionSpec::jitter_fwhm_ps)
      .def_readwrite("reference_wavelength_nm", &DispersionSpec::reference_wavelength_nm)
      .def("total_dispersion", &DispersionSpec::total_dispersion);

  m.def("resolution", &resolution, py::arg("spec"));
  m.def("window_to_bandwidth", &window_to_bandwidth, py::arg("window_ns"), py::arg("spec"),
        py::arg("factor") = 2.0);
  m.def("smear_csi", &smear_csi, py::arg("csi"), py::arg("spec"));
  m.def("fringe_contrast", &fringe_contrast, py::arg("map"), py::arg("tau_ps"));
  m.def("filter_signal", &filter_signal, py::arg("jsa"), py::arg("width_nm"), py::arg("center_nm"));
  m.def("window_filter_scan",
        [](const JointSpectralAmplitude& a, const JointSpectralAmplitude& b, std::vector<double> w) {
          std::vector<std::pair<double, double>> out;
          for (const auto& s : window_filter_scan(a, b, w)) out.emplace_back(s.width_nm, s.visibility);
          return out;
        },
        py::arg("jsa1"), py::arg("jsa2"), py::arg("widths_nm"));
  // Events as (out1 arrival ps, out2 arrival ps) pairs.
  m.def("sample_events",
        [](const CsiMap& map, std::size_t n, std::uint64_t seed, const DispersionSpec& spec) {
          std::vector<std::pair<double, double>> out;
          for (const auto& e : sample_events(map, n, seed, spec))
            out.emplace_back(e.first.arrival_time_ps, e.second.arrival_time_ps);
          return out;
        },
        py::arg("csi"), py::arg("n_pairs"), py::arg("seed"), py::arg("spec"));
}

void bind_runner(py::module_& m) {
  py::class_<RunConfig>(m, "RunConfig")
      .def_property_readonly("scenario", [](const RunConfig& c) { return std::string(to_string(c.scenario)); })
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readonly("entries", &RunConfig::entries)
      .def("hash", &RunConfig::hash)
      .def("grid", &RunConfig::grid);

  // Keyword arguments follow the command-line overrides.
  m.def("parse_config",
        [](std::string_view text, std::optional<std::string> scenario,
           std::optional<std::filesystem::path> output_dir, std::optional<std::uint64_t> seed) {
          ConfigOverrides o;
          if (scenario) {
            o.scenario = parse_scenario(*scenario);
            if (!o.scenario) throw ConfigError({"unknown scenario '" + *scenario + "'"});
          }
          o.output_dir = std::move(output_dir);
          o.seed = seed;
          return parse_config(text, o);
        },
        py::arg("text"), py::kw_only(), py::arg("scenario") = py::none(),
        py::arg("output_dir") = py::none(), py::arg("seed") = py::none());

  m.def("run",
        [](const RunConfig& cfg) {
          RunResult r;
          {
            py::gil_scoped_release release;
            r = run(cfg);
          }
          py::dict summary;
          for (const auto& [k, v] : r.summary) summary[py::str(k)] = v;
          return py::make_tuple(r.files, summary);
        },
        py::arg("config"), "Returns (written files, summary dict).");

  m.def("config_keys", &config_keys);
  m.def("set_thread_count", &set_thread_count, py::arg("n"));
  m.def("thread_count", &thread_count);
}

}  // namespace

PYBIND11_MODULE(_homsim, m) {
  m.doc() = "Spectrally resolved Hong-Ou-Mandel interference simulator";
  m.attr("__version__") = version();

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidSpec>(m, "InvalidSpec", error.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

  bind_source(m);
  bind_interference(m);
  bind_multipair(m);
  bind_spectrometer(m);
  bind_runner(m);
}
