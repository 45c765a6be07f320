#pragma once

// The vfcast command line: fit, predict, ktons, simulate, crossval and
// powerlaw subcommands over the library. Exit codes: 0 success, 1 input or
// usage error, 2 numerical result delivered on a best-effort basis
// (optimizer or quadrature short of tolerance).

#include <iosfwd>
#include <string>
#include <vector>

#include "vf/model.hpp"
#include "vf/simulation.hpp"

namespace vf {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitBestEffort = 2;

/// "N1:N2". Throws InvalidArgument on malformed or negative input.
CountPair parse_pair(const std::string& text);

/// Comma-separated segments "M1:M2" or "M1:M2:step". Starting from (0,0),
/// a stepped segment walks population 1 up to M1 and then population 2 up
/// to M2 in increments of step, always ending on (M1,M2); a plain segment
/// adds just its point. Segments may not move backwards.
std::vector<CountPair> parse_sweep(const std::string& text);

/// "projection1", "projection2" or "proportional:rho".
GrowthScheme parse_scheme(const std::string& text);

/// Runs one invocation; argv[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vf
