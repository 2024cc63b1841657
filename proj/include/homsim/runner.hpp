#pragma once

// Scenario dispatch: runs one configured simulation and writes its CSV and a
// `<name>.meta.json` sidecar next to the `<name>.csv` into the output directory.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "homsim/config.hpp"

namespace homsim {

struct RunResult {
  std::vector<std::filesystem::path> files;
  /// Scalar results also recorded in the sidecar, in output order.
  std::vector<std::pair<std::string, double>> summary;
};

/// Throws ConfigError / InvalidSpec, NumericalFailure or IoError.
RunResult run(const RunConfig& cfg);

/// Process exit code for an exception raised by parse or run:
/// 2 configuration, 3 numerical failure, 4 I/O, 1 anything else.
int exit_code_for(const std::exception& e);

const char* version();

}  // namespace homsim
