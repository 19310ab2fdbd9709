#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relaynet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

/// Runs one command line (program name excluded). Results go to `out` unless
/// --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace relaynet::cli
