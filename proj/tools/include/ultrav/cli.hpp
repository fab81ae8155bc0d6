#pragma once

// The `ultrav` command line as a library, so tests can drive it in-process.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ultrav/synth.hpp"

namespace ultrav::cli {

/// Runs one command line (args[0] is the program name). Tables and reports
/// go to `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Loads a directory written by `generate`. The clean cube is optional.
[[nodiscard]] SceneTruth read_truth(const std::filesystem::path& dir);

/// Cost-trace CSV body: "iter,cost" header, then one row per outer iteration.
[[nodiscard]] std::string cost_trace_csv(const std::vector<double>& trace);

} // namespace ultrav::cli
