#pragma once

#include <iosfwd>

namespace drsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitGate = 2;

/// Runs one dr_spot_sim command. Normal output goes to `out`, diagnostics to
/// `err`. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace drsim::cli
