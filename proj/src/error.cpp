#include "vssd/error.hpp"

namespace vssd {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::kAddressOutOfRange: return "AddressOutOfRange";
    case Errc::kProgramOnProgrammedPage: return "ProgramOnProgrammedPage";
    case Errc::kReadFreePage: return "ReadFreePage";
    case Errc::kPayloadTooLarge: return "PayloadTooLarge";
    case Errc::kPathTooLong: return "PathTooLong";
    case Errc::kInvalidGeometry: return "InvalidGeometry";
    case Errc::kDuplicatePolicy: return "DuplicatePolicy";
    case Errc::kPolicyNotFound: return "PolicyNotFound";
    case Errc::kMalformedCommand: return "MalformedCommand";
    case Errc::kJudgedLivePage: return "JudgedLivePage";
    case Errc::kMalformedPayload: return "MalformedPayload";
    case Errc::kMacVerificationFailed: return "MacVerificationFailed";
    case Errc::kMalformedPlaintext: return "MalformedPlaintext";
    case Errc::kReplayedMessage: return "ReplayedMessage";
    case Errc::kDeviceFull: return "DeviceFull";
    case Errc::kNoVictimGain: return "NoVictimGain";
    case Errc::kUnmappedLba: return "UnmappedLba";
    case Errc::kClassifyFreePage: return "ClassifyFreePage";
    case Errc::kFileNotFound: return "FileNotFound";
    case Errc::kHoleRead: return "HoleRead";
    case Errc::kMisaligned: return "Misaligned";
    case Errc::kFsCorrupted: return "FsCorrupted";
    case Errc::kRecoveryNotPossible: return "RecoveryNotPossible";
    case Errc::kFileUnknown: return "FileUnknown";
    case Errc::kEmptyImage: return "EmptyImage";
    case Errc::kScriptParseError: return "ScriptParseError";
    case Errc::kAssertionFailed: return "AssertionFailed";
    case Errc::kImageFormat: return "ImageFormat";
    case Errc::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace vssd
