#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "settings.hpp"

namespace holo::cli {

/// Parses `args` (without the program name), runs the chosen subcommand and
/// returns the process exit code: 0 on success, 1 for a failed run, 2 for a
/// usage or configuration error. Failures print one line to `err`:
///   error code=<module.code> message="<text>"
int run_scenario(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
                 const EnvLookup& env = process_env);

}  // namespace holo::cli
