#pragma once

#include <iosfwd>

namespace quotemix {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitPartial = 2;
inline constexpr int kExitAuth = 3;

// Entry point of the `quotemix` command. Writes normal output to `out` and
// diagnostics to `err`; never calls exit().
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Asks a running `generate` to stop after the cells in flight. Async-signal-safe.
void request_stop();

}  // namespace quotemix
