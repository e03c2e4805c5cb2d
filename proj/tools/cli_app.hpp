#pragma once

#include <iosfwd>

#include "json.hpp"

namespace mvasicek::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

/// Effective configuration used when no file or flag overrides a value.
nlohmann::json default_config();

/// Parses the command line, runs one subcommand and returns the exit code.
/// Results go to `out` (or to files named in the config), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mvasicek::cli
