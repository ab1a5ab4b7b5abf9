#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "vssd/error.hpp"
#include "vssd/types.hpp"

namespace vssd {

class Ftl;
class HostFs;

/// Roll back to the file contents as of this time.
struct TimeTarget {
  Timestamp time = 0;
  friend bool operator==(const TimeTarget&, const TimeTarget&) = default;
};

/// Roll back `ordinal` preserved versions per block (0 = live copy, 1 = newest
/// old version).
struct VersionTarget {
  std::uint32_t ordinal = 1;
  friend bool operator==(const VersionTarget&, const VersionTarget&) = default;
};

using RecoveryTarget = std::variant<TimeTarget, VersionTarget>;

std::string describe(const RecoveryTarget& target);

struct RecoveryRequest {
  std::string path;
  RecoveryTarget target;
  /// nullopt asks the device to scan every physical page for the path.
  std::optional<std::vector<Extent>> lba_list;
};

struct RecoveredChunk {
  std::uint64_t offset = 0;
  Bytes data;
  Ppa ppa;
  Timestamp wt = 0;

  friend bool operator==(const RecoveredChunk&, const RecoveredChunk&) =
      default;
};

struct RecoveredImage {
  std::string path;
  RecoveryTarget target;
  /// Strictly increasing offsets.
  std::vector<RecoveredChunk> chunks;
  /// VERSION targets only: the chosen pages carry different write times, so
  /// the image may mix blocks from different moments.
  bool mixed_versions = false;

  /// Chunks concatenated in offset order.
  Bytes contents() const;

  friend bool operator==(const RecoveredImage&, const RecoveredImage&) =
      default;
};

/// One or more blocks have no recoverable version at the target.
class RecoveryNotPossible : public Error {
 public:
  RecoveryNotPossible(std::string path, std::vector<std::uint64_t> offsets);

  const std::vector<std::uint64_t>& offsets() const { return offsets_; }

 private:
  std::vector<std::uint64_t> offsets_;
};

/// Newest page of an LPA whose chain holds (or held) pages of the scanned path.
struct ChainHead {
  Lba lba = 0;
  Ppa head;

  friend bool operator==(const ChainHead&, const ChainHead&) = default;
};

/// Scans every programmed page (block-major, page-minor) for OOB records whose
/// path equals `path` byte for byte, and for chain gaps left by reclaimed
/// pages of that path. Returns one head per matching LPA (its newest page),
/// ordered by LPA.
std::vector<ChainHead> exhaustive_scan(const Ftl& ftl, std::string_view path);

/// Device-side rollback. Read-only. Throws RecoveryNotPossible (listing the
/// failed offsets) or Errc::kFileUnknown when no block of the file existed at
/// the target.
RecoveredImage recover(const Ftl& ftl, const RecoveryRequest& req,
                       Timestamp now);

/// Builds the request the recovery tool sends: the file system's LBA list, or
/// a null list when the file system cannot produce one.
RecoveryRequest make_recovery_request(const HostFs& fs, std::string path,
                                      RecoveryTarget target, bool use_lba_list);

/// Rewrites the file through the host file system. The restore is an ordinary
/// write, so it is itself versioned. Throws Errc::kEmptyImage.
void apply_recovery(HostFs& fs, const RecoveredImage& image);

}  // namespace vssd
