#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vssd/flash.hpp"
#include "vssd/policy.hpp"
#include "vssd/recovery.hpp"
#include "vssd/secure_channel.hpp"
#include "vssd/types.hpp"

namespace vssd {

class Ftl;

/// What a recovery probe should produce (or produced).
struct ProbeContents {
  Bytes data;
  friend bool operator==(const ProbeContents&, const ProbeContents&) = default;
};
struct ProbeUnrecoverable {
  std::vector<std::uint64_t> offsets;
  friend bool operator==(const ProbeUnrecoverable&,
                         const ProbeUnrecoverable&) = default;
};
struct ProbeNoSuchFile {
  friend bool operator==(const ProbeNoSuchFile&, const ProbeNoSuchFile&) =
      default;
};
using ProbeAnswer =
    std::variant<ProbeContents, ProbeUnrecoverable, ProbeNoSuchFile>;

std::string describe(const ProbeAnswer& answer);

/// Runs a device-side recovery and folds the outcome into a ProbeAnswer.
ProbeAnswer probe_device(const Ftl& ftl, const RecoveryRequest& req,
                         Timestamp now);

/// Brute-force ground truth. Keeps every write and every accepted policy
/// command and answers recovery questions from that log alone, without
/// looking at any device state.
class ShadowOracle {
 public:
  /// Almanac mode: every piggybacked block is governed by (rt, 0, 0).
  void set_almanac(std::optional<Duration> rt) { almanac_rt_ = rt; }

  /// `piggybacked` is false when the write reached the device without its
  /// (path, offset) tag.
  void record_write(Timestamp t, const std::string& path,
                    std::uint64_t offset, Bytes data, bool piggybacked = true);

  /// The status the device must answer for `cmd` given the accepted history.
  ResponseStatus predict(const PolicyCommand& cmd) const;
  /// Logs an accepted command.
  void record_policy(Timestamp t, const PolicyCommand& cmd);

  ProbeAnswer expected(const std::string& path, const RecoveryTarget& target,
                       Timestamp now) const;

  /// Writes and accepted commands logged so far.
  std::size_t events() const { return ops_; }

 private:
  struct Version {
    std::uint64_t op = 0;
    Timestamp wt = 0;
    Bytes data;
    bool piggybacked = true;
    std::optional<std::uint64_t> sup_op;
    Timestamp sup_time = 0;
  };
  struct PolicyEvent {
    std::uint64_t op = 0;
    Timestamp time = 0;
    CommandKind kind = CommandKind::kCreate;
    std::optional<ConfigParams> cp;
  };
  using Chain = std::vector<Version>;

  std::optional<ConfigParams> cp_before(const std::string& path,
                                        std::uint64_t op) const;
  bool deleted_between(const std::string& path, std::uint64_t after,
                       std::uint64_t before) const;
  bool retained(const std::string& path, const Version& v) const;
  bool entitled(const std::string& path, const Chain& chain, std::size_t k,
                Timestamp now) const;

  std::optional<Duration> almanac_rt_;
  std::uint64_t ops_ = 0;
  std::map<std::string, std::map<std::uint64_t, Chain>> files_;
  std::map<std::string, std::vector<PolicyEvent>> policy_log_;
};

struct RandomRunConfig {
  std::uint64_t seed = 1;
  std::size_t ops = 10000;
  std::size_t probes = 200;
  /// Points at which every file is recovered both ways (scan and list).
  std::size_t checkpoints = 50;
  /// Probe every GC pass against a fixed probe set before and after erase.
  bool gc_watch = true;
  FlashGeometry geometry{32, 32, 64, 256};
};

struct RandomRunReport {
  std::size_t ops = 0;
  std::size_t page_writes = 0;
  std::size_t device_full = 0;
  std::size_t policy_commands = 0;
  std::size_t policy_mismatches = 0;
  std::size_t probes = 0;
  std::size_t probes_recovered = 0;
  std::size_t probes_unrecoverable = 0;
  std::size_t probe_mismatches = 0;
  std::size_t gc_passes = 0;
  std::size_t gc_checks = 0;
  std::size_t gc_violations = 0;
  std::uint64_t ov_losses = 0;
  std::size_t scan_checks = 0;
  std::size_t scan_mismatches = 0;
  /// First few mismatches, human readable.
  std::vector<std::string> notes;
};

/// Seeded random workload (writes, clock advances, policy churn, explicit
/// GC) cross-checked against a ShadowOracle.
RandomRunReport run_random(const RandomRunConfig& config);

}  // namespace vssd
