#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace autosd {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitNotReproducible = 3,
    kExitBackendUnavailable = 4,
};

/// Entry point of the autosd command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace autosd
