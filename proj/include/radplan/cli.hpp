#pragma once

#include <string>
#include <vector>

namespace radplan::cli {

/// Entry point for the command-line front end (solve / classify / model /
/// simulate / verify). Returns the process exit code:
///   0  success, artifacts written
///   2  validation failure (nonlinearity conditions violated, invalid model)
///   3  numeric failure (blow-up, non-convergence); diagnostics still written
///   64 unknown flags or unusable command line
int run(int argc, const char* const* argv);

/// Test-friendly overload; args exclude the program name.
int run(const std::vector<std::string>& args);

}  // namespace radplan::cli
