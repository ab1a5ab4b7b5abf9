#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "vssd/ftl.hpp"
#include "vssd/recovery.hpp"
#include "vssd/secure_channel.hpp"

namespace vssd {

struct DeviceStats {
  Timestamp clock = 0;
  std::uint64_t host_pages_written = 0;
  std::uint64_t nand_pages_programmed = 0;
  std::uint64_t gc_invocations = 0;
  std::uint64_t relocations = 0;
  std::uint64_t erases = 0;
  std::uint64_t ov_pages_resident = 0;
  std::uint64_t free_blocks = 0;
  std::uint64_t mapped_lbas = 0;
  std::uint64_t policies = 0;

  friend bool operator==(const DeviceStats&, const DeviceStats&) = default;
};

std::string format_stats(const DeviceStats& s);

// Requests accepted by the device queue.
struct WriteRequest {
  Lba lba = 0;
  Bytes payload;
  std::optional<PiggybackSet> pbset;
  friend bool operator==(const WriteRequest&, const WriteRequest&) = default;
};
struct ReadRequest {
  Lba lba = 0;
  friend bool operator==(const ReadRequest&, const ReadRequest&) = default;
};
struct PolicyRequest {
  SecureEnvelope envelope;
  friend bool operator==(const PolicyRequest&, const PolicyRequest&) = default;
};
struct RecoverRequest {
  RecoveryRequest request;
  friend bool operator==(const RecoverRequest& a, const RecoverRequest& b) {
    return a.request.path == b.request.path &&
           a.request.target == b.request.target &&
           a.request.lba_list == b.request.lba_list;
  }
};
struct GcRequest {
  friend bool operator==(const GcRequest&, const GcRequest&) = default;
};
struct StatsRequest {
  friend bool operator==(const StatsRequest&, const StatsRequest&) = default;
};

using Request = std::variant<WriteRequest, ReadRequest, PolicyRequest,
                             RecoverRequest, GcRequest, StatsRequest>;

using Response = std::variant<Ppa, Bytes, SecureEnvelope, RecoveredImage,
                              GcReport, DeviceStats>;

/// One request per line, fields separated by single spaces; binary fields
/// and paths are lowercase hex ("-" for an empty path is not allowed):
///
///     WRITE <lba> <payload-hex> [<path-hex> <offset>]
///     READ <lba>
///     POLICY <envelope-hex>
///     RECOVER <path-hex> TIME|VERSION <n> SCAN
///     RECOVER <path-hex> TIME|VERSION <n> LBAS <offset>:<lba>[,...]
///     GC
///     STATS
std::string encode_request(const Request& request);
/// Throws Errc::kScriptParseError.
Request decode_request(std::string_view line);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws std::invalid_argument.
Bytes from_hex(std::string_view hex);

/// The simulated SSD: FTL, policy verifier and device timer behind a single
/// serialized request interface.
class Device {
 public:
  Device(FlashGeometry geometry, DeviceKey key);

  Timestamp now() const { return clock_; }
  /// The device timer only moves forward.
  void advance_to(Timestamp t);

  Ppa write(Lba lba, std::span<const std::uint8_t> payload,
            const std::optional<PiggybackSet>& pbset);
  Bytes read(Lba lba) const;
  /// Authenticates and applies a policy command. Never throws for bad input;
  /// the outcome travels back inside the sealed response.
  SecureEnvelope policy(const SecureEnvelope& envelope);
  RecoveredImage recover(const RecoveryRequest& req) const;
  GcReport gc();
  DeviceStats stats() const;

  Response submit(const Request& request);

  /// Status of the most recent POLICY request, for diagnostics.
  ResponseStatus last_policy_status() const { return last_policy_status_; }

  /// Almanac mode (one RT for every page) when set.
  void set_almanac(std::optional<Duration> rt);

  Ftl& ftl() { return ftl_; }
  const Ftl& ftl() const { return ftl_; }
  PolicyVerifier& verifier() { return verifier_; }

  template <class Archive>
  void save(Archive& ar) const {
    ar(ftl_, clock_, verifier_.last_request_seq(), verifier_.response_seq());
  }
  template <class Archive>
  void load(Archive& ar) {
    std::uint64_t last_request = 0;
    std::uint64_t response = 0;
    ar(ftl_, clock_, last_request, response);
    verifier_.restore_counters(last_request, response);
  }

 private:
  Ftl ftl_;
  PolicyVerifier verifier_;
  Timestamp clock_ = 0;
  ResponseStatus last_policy_status_ = ResponseStatus::kSuccess;
};

}  // namespace vssd
