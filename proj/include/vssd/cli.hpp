#pragma once

#include <iosfwd>

#include "vssd/error.hpp"
#include "vssd/secure_channel.hpp"

namespace vssd {

/// Process exit codes. Fixed; scripts may rely on them.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kImage = 3;
inline constexpr int kDuplicatePolicy = 10;
inline constexpr int kPolicyNotFound = 11;
inline constexpr int kMacVerificationFailed = 12;
inline constexpr int kReplayed = 13;
inline constexpr int kMalformed = 14;
inline constexpr int kRecoveryNotPossible = 20;
inline constexpr int kFileUnknown = 21;
inline constexpr int kFsCorrupted = 22;
inline constexpr int kDeviceFull = 30;
inline constexpr int kNotFound = 31;
inline constexpr int kNoVictimGain = 32;
inline constexpr int kScenarioParse = 40;
inline constexpr int kScenarioFailed = 41;
}  // namespace exit_code

int exit_code_for(Errc code) noexcept;
int exit_code_for(ResponseStatus status) noexcept;

/// The whole command line tool; main() only forwards to it.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace vssd
