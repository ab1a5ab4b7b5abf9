#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vssd {

/// Every failure the simulator can report. The CLI maps each one to a fixed
/// exit code (see cli.cpp), so values here are append-only.
enum class Errc {
  kAddressOutOfRange,
  kProgramOnProgrammedPage,
  kReadFreePage,
  kPayloadTooLarge,
  kPathTooLong,
  kInvalidGeometry,

  kDuplicatePolicy,
  kPolicyNotFound,
  kMalformedCommand,
  kJudgedLivePage,

  kMalformedPayload,
  kMacVerificationFailed,
  kMalformedPlaintext,
  kReplayedMessage,

  kDeviceFull,
  kNoVictimGain,
  kUnmappedLba,
  kClassifyFreePage,

  kFileNotFound,
  kHoleRead,
  kMisaligned,
  kFsCorrupted,

  kRecoveryNotPossible,
  kFileUnknown,
  kEmptyImage,

  kScriptParseError,
  kAssertionFailed,

  kImageFormat,
  kIo,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vssd
