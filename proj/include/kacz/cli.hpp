#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kacz::cli {

enum ExitCode : int { kOk = 0, kNumeric = 1, kUsage = 2, kIo = 3 };

/// Parses argv (argv[0] is the program name) and runs one subcommand:
/// spectrum, transform, volumes, solve or ensemble. CSV goes to `out` unless
/// --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kacz::cli
