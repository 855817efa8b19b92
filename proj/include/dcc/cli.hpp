#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace dcc::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationFailure = 1,
  kComputationError = 2,
  kUsageError = 3,
};

/// Directory holding the bundled scenario fixtures: $DCC_FIXTURE_DIR when
/// set, otherwise the path compiled into the binary.
std::filesystem::path fixture_dir();

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dcc::cli
