#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace salflow::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // usage, configuration, bad input values
inline constexpr int kExitIo = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAssertion = 4;  // demo-occlusion ordering did not hold

/// Runs one command line (without the program name). Diagnostics go to `err`,
/// the error category is the first word of the message.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace salflow::cli
