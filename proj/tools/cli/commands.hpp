#pragma once

// Subcommand implementations behind the `holo` tool. Each writes its
// artifacts into an output directory and records config.resolved plus a
// manifest of the files it produced.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "settings.hpp"

namespace holo::cli {

const std::vector<std::string>& command_names();
std::string_view command_help(std::string_view command);

/// Every setting the subcommand accepts (always includes seed and out).
std::vector<KeySpec> keys_for(std::string_view command);

/// Runs `command` into settings.text("out"). `log` receives a short human
/// readable summary.
void run_command(std::string_view command, const Settings& settings, std::ostream& log);

/// Writes config.resolved and manifest.csv (file,bytes,sha256 for every other
/// file below `dir`, sorted by path).
void finish_output(const std::filesystem::path& dir, std::string_view command,
                   const Settings& settings);

}  // namespace holo::cli
