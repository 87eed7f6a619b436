#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace granular {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerdictFailed = 1,  // only with --strict
  kExitUsage = 2,
  kExitNumeric = 3,
};

/// Entry point of the `granular` tool; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Version string written into run manifests.
std::string code_version();

}  // namespace granular
