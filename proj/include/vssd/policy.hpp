#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vssd/types.hpp"

namespace vssd {

/// A policy's configuration parameters (RT, BC, V).
struct ConfigParams {
  /// Retention time: how long a superseded version stays recoverable.
  Duration rt = 0;
  /// Backup cycle: versions that were live for less than this are dropped
  /// when superseded. 0 keeps every version.
  Duration bc = 0;
  /// Maximum number of old versions kept per block. 0 means unlimited.
  std::uint32_t v_max = 0;

  friend bool operator==(const ConfigParams&, const ConfigParams&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(rt, bc, v_max);
  }
};

struct PolicyEntry {
  std::string path;
  ConfigParams cp;
  /// When the CP currently in force was installed (CREATE or last CHANGE).
  Timestamp created_at = 0;

  friend bool operator==(const PolicyEntry&, const PolicyEntry&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(path, cp, created_at);
  }
};

enum class CommandKind : std::uint8_t { kCreate = 1, kChange = 2, kDelete = 3 };

std::string_view command_kind_name(CommandKind kind) noexcept;

struct PolicyCommand {
  CommandKind kind = CommandKind::kCreate;
  std::string path;
  /// Absent iff kind == kDelete.
  std::optional<ConfigParams> cp;

  static PolicyCommand create(std::string path, ConfigParams cp) {
    return {CommandKind::kCreate, std::move(path), cp};
  }
  static PolicyCommand change(std::string path, ConfigParams cp) {
    return {CommandKind::kChange, std::move(path), cp};
  }
  static PolicyCommand remove(std::string path) {
    return {CommandKind::kDelete, std::move(path), std::nullopt};
  }

  /// Throws Errc::kMalformedCommand if the path is empty or the CP presence
  /// does not match the kind.
  void validate() const;

  friend bool operator==(const PolicyCommand&, const PolicyCommand&) = default;
};

/// Version bookkeeping for one physical page.
struct PageVersionMeta {
  Timestamp wt = 0;
  /// When a newer write to the same block superseded this page.
  std::optional<Timestamp> invalidated_at;
  /// Newer versions of the same block that were retained when superseded.
  std::uint32_t chain_depth = 0;
  /// Dropped by the backup-cycle rule at supersession time (final).
  bool coalesced = false;

  friend bool operator==(const PageVersionMeta&, const PageVersionMeta&) =
      default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(wt, invalidated_at, chain_depth, coalesced);
  }
};

enum class ReclaimReason : std::uint8_t {
  kNone,
  kNoPolicy,
  kCoalesced,
  kExpired,
  kVersionCap,
};

std::string_view reclaim_reason_name(ReclaimReason reason) noexcept;

struct PreserveVerdict {
  bool preserve = false;
  ReclaimReason reason = ReclaimReason::kNone;

  friend bool operator==(const PreserveVerdict&, const PreserveVerdict&) =
      default;
};

/// Decides whether a superseded page must still be kept. Pure function.
/// Throws Errc::kJudgedLivePage if meta.invalidated_at is empty.
PreserveVerdict is_preservable(const PageVersionMeta& meta,
                               const PolicyEntry* entry, Timestamp now);

/// Backup-cycle rule, applied once when a page is superseded: a version
/// that was live for less than bc is coalesced into its successor.
bool is_coalesced(Timestamp wt, Timestamp superseded_at,
                  const ConfigParams& cp) noexcept;

struct ApplyOutcome {
  /// Set for DELETE: the file whose old versions must be purged.
  std::optional<std::string> purge_path;
};

/// Device-resident policy metadata, keyed by byte-exact file path.
class PolicyTable {
 public:
  /// Throws Errc::kDuplicatePolicy / Errc::kPolicyNotFound /
  /// Errc::kMalformedCommand.
  ApplyOutcome apply(const PolicyCommand& cmd, Timestamp now);

  const PolicyEntry* lookup(const std::string& path) const;

  std::size_t size() const { return entries_.size(); }
  /// Entries ordered by path.
  std::vector<PolicyEntry> entries() const;

  /// One line per entry: "<path>\t<rt>\t<bc>\t<v_max>\t<created_at>",
  /// durations and times in seconds, sorted by path.
  std::string dump() const;

  friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(entries_);
  }

 private:
  std::unordered_map<std::string, PolicyEntry> entries_;
};

}  // namespace vssd
