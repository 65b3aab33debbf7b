#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace loopfield::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` includes the program name. Results go to the
/// --out file, or to `out` when --out is absent or "-".
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses "e-2"-style radii (e^{-2}) and plain decimals.
double parse_scale(const std::string& token);

/// RFC 4180 quoting for a single CSV field.
std::string csv_field(const std::string& s);

}  // namespace loopfield::cli
