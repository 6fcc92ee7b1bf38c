#pragma once

#include <iosfwd>

namespace revrl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitIoError = 3;

/// Entry point of the `revrl` tool: run | ablate | sweep | report, plus
/// --dump-preset. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace revrl
