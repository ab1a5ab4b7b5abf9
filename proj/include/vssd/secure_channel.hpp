#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "vssd/policy.hpp"
#include "vssd/types.hpp"

namespace vssd {

/// Secret shared by the policy manager and the device firmware.
class DeviceKey {
 public:
  static constexpr std::size_t kSize = 32;

  explicit DeviceKey(const std::array<std::uint8_t, kSize>& bytes)
      : bytes_(bytes) {}

  /// Fresh key from the system CSPRNG.
  static DeviceKey random();
  /// The key compiled into firmware and policy manager builds of this
  /// simulator (stand-in for the vendor-provisioned key).
  static DeviceKey vendor();

  std::span<const std::uint8_t> bytes() const { return bytes_; }

  friend bool operator==(const DeviceKey&, const DeviceKey&) = default;

 private:
  std::array<std::uint8_t, kSize> bytes_;
};

/// Encrypt-then-MAC envelope.
///
/// Wire layout (all integers big-endian):
///
///     nonce[16] | seq:u64 | len:u32 | ciphertext[len] | mac[32]
///
/// ciphertext = AES-256-CTR(K_enc, iv = nonce, plaintext), and
/// mac = HMAC-SHA256(K_mac, nonce | seq | len | ciphertext). K_enc and K_mac
/// are HMAC-SHA256(K_dev, label) for two fixed labels.
struct SecureEnvelope {
  static constexpr std::size_t kNonceSize = 16;
  static constexpr std::size_t kMacSize = 32;
  static constexpr std::size_t kHeaderSize = kNonceSize + 8 + 4;
  static constexpr std::size_t kOverhead = kHeaderSize + kMacSize;

  std::array<std::uint8_t, kNonceSize> nonce{};
  std::uint64_t seq = 0;
  Bytes ciphertext;
  std::array<std::uint8_t, kMacSize> mac{};

  Bytes serialize() const;
  /// Structural decode only; authenticity is checked by open().
  /// Throws Errc::kMacVerificationFailed when the framing is inconsistent
  /// (a truncated or padded envelope cannot be authentic).
  static SecureEnvelope parse(std::span<const std::uint8_t> wire);

  friend bool operator==(const SecureEnvelope&, const SecureEnvelope&) =
      default;
};

/// Largest payload seal() accepts.
inline constexpr std::size_t kMaxMessageSize = 64 * 1024;

/// Throws Errc::kMalformedPayload for an empty or oversize payload.
SecureEnvelope seal(std::span<const std::uint8_t> payload, const DeviceKey& key,
                    std::uint64_t seq = 0);

/// Verifies the MAC first, then decrypts. Throws Errc::kMacVerificationFailed
/// on any alteration or a wrong key.
Bytes open(const SecureEnvelope& envelope, const DeviceKey& key);

enum class ResponseStatus : std::uint8_t {
  kSuccess = 0,
  kDuplicatePolicy = 1,
  kPolicyNotFound = 2,
  kMalformed = 3,
  kMacVerificationFailed = 4,
  kReplayed = 5,
};

std::string_view response_status_name(ResponseStatus status) noexcept;

struct ResponseMessage {
  ResponseStatus status = ResponseStatus::kSuccess;
  /// Sequence number of the request this answers (0 if it could not be
  /// authenticated).
  std::uint64_t request_seq = 0;

  friend bool operator==(const ResponseMessage&, const ResponseMessage&) =
      default;
};

// Plaintext codecs. Layouts (big-endian):
//   command:  ver:u8=1 | kind:u8 | path_len:u16 | path | [rt:i64 bc:i64 v:u32]
//   response: ver:u8=1 | status:u8 | request_seq:u64
// Decoders throw Errc::kMalformedPlaintext.
Bytes encode_command(const PolicyCommand& cmd);
PolicyCommand decode_command(std::span<const std::uint8_t> bytes);
Bytes encode_response(const ResponseMessage& msg);
ResponseMessage decode_response(std::span<const std::uint8_t> bytes);

/// Host-side trusted endpoint (the enclave analog). Holds its own copy of the
/// key; nothing outside this object and PolicyVerifier ever sees it.
class SecurePolicyManager {
 public:
  explicit SecurePolicyManager(DeviceKey key) : key_(key) {}

  SecureEnvelope seal_command(const PolicyCommand& cmd);
  /// Opens and checks a device response: MAC, freshness, and that it
  /// answers a request this manager sent.
  ResponseMessage open_response(const SecureEnvelope& envelope);

  std::uint64_t next_seq() const { return next_seq_; }
  std::uint64_t last_response_seq() const { return last_response_seq_; }
  void restore_counters(std::uint64_t next_seq, std::uint64_t last_response) {
    next_seq_ = next_seq;
    last_response_seq_ = last_response;
  }

 private:
  DeviceKey key_;
  std::uint64_t next_seq_ = 1;
  std::uint64_t last_response_seq_ = 0;
};

/// Device-side policy verifier: authenticates requests (rejecting stale or
/// duplicate sequence numbers) and seals responses.
class PolicyVerifier {
 public:
  explicit PolicyVerifier(DeviceKey key) : key_(key) {}

  /// Throws kMacVerificationFailed, kReplayedMessage or kMalformedPlaintext.
  PolicyCommand open_command(const SecureEnvelope& envelope);
  SecureEnvelope seal_response(const ResponseMessage& msg);

  std::uint64_t last_request_seq() const { return last_request_seq_; }
  std::uint64_t response_seq() const { return response_seq_; }
  void restore_counters(std::uint64_t last_request, std::uint64_t response) {
    last_request_seq_ = last_request;
    response_seq_ = response;
  }

 private:
  DeviceKey key_;
  std::uint64_t last_request_seq_ = 0;
  std::uint64_t response_seq_ = 0;
};

}  // namespace vssd
