#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sigid::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;     // processing failed (e.g. degenerate input)
inline constexpr int kUsageError = 2;       // bad flags, bad config, missing files
inline constexpr int kDataError = 3;        // malformed sidecar, header/data length mismatch
inline constexpr int kUnsupportedMethod = 4;

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sigid::cli
