#pragma once

#include <iosfwd>

namespace stratexp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitConfig = 4;

/// Entry point of the `stratexp` tool: simulate, nfl, audit-ic, noise-check
/// and opt subcommands. Results go to `out`, diagnostics to `err`.
int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, char** argv);

}  // namespace stratexp
