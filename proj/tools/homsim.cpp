// Command-line front end: homsim <scenario> --config <file> [options]

#include <charconv>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>

#include <CLI11.hpp>

#include "homsim/csv.hpp"
#include "homsim/parallel.hpp"
#include "homsim/runner.hpp"

namespace {

constexpr int kConfigExit = 2;

// nullopt when unset; throws ConfigError when malformed.
std::optional<unsigned> threads_from_env() {
  const char* raw = std::getenv("HOMSIM_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string_view text(raw);
  unsigned n = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc{} || end != text.data() + text.size())
    throw homsim::ConfigError({"HOMSIM_THREADS: expected a non-negative integer, got '" +
                               std::string(text) + "'"});
  return n;
}

std::string scenario_list() {
  return "jsa, schmidt, dip, csi, multipair, filter-scan, sample, reconstruct";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrally resolved Hong-Ou-Mandel interference simulator"};
  app.set_version_flag("--version", homsim::version());

  std::string scenario_name;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  bool list_keys = false;

  app.add_option("scenario", scenario_name, "One of: " + scenario_list());
  app.add_option("-c,--config", config_path, "Configuration file (key = value)");
  app.add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Random seed (overrides sample.seed)");
  app.add_option("-t,--threads", threads, "Worker threads, 0 = all cores (overrides HOMSIM_THREADS)");
  app.add_flag("--list-keys", list_keys, "Print every configuration key and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigExit;
  }

  if (list_keys) {
    for (const auto& [key, help] : homsim::config_keys()) std::cout << key << "\n    " << help << "\n";
    return 0;
  }

  try {
    if (scenario_name.empty() || config_path.empty())
      throw homsim::ConfigError({"usage: homsim <scenario> --config <file> [--out <dir>] "
                                 "[--seed <u64>] [--threads <n>]"});
    const auto scenario = homsim::parse_scenario(scenario_name);
    if (!scenario)
      throw homsim::ConfigError({"unknown scenario '" + scenario_name + "' (expected one of " +
                                 scenario_list() + ")"});

    if (threads) homsim::set_thread_count(*threads);
    else if (const auto env = threads_from_env()) homsim::set_thread_count(*env);

    homsim::ConfigOverrides overrides;
    overrides.scenario = scenario;
    if (out_dir) overrides.output_dir = *out_dir;
    overrides.seed = seed;

    const homsim::RunConfig cfg = homsim::load_config(config_path, overrides);
    const homsim::RunResult result = homsim::run(cfg);

    for (const auto& [key, value] : result.summary)
      std::cout << key << " = " << homsim::csv::format_number(value) << "\n";
    for (const auto& file : result.files) std::cout << "wrote " << file.string() << "\n";
    return 0;
  } catch (const homsim::ConfigError& e) {
    std::cerr << "homsim: " << e.what() << "\n";
    return homsim::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "homsim: " << e.what() << "\n";
    return homsim::exit_code_for(e);
  }
}
