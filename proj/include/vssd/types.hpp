#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vssd {

/// Simulated device time, in seconds since the scenario epoch.
using Timestamp = std::int64_t;
/// Length of a time interval, in seconds.
using Duration = std::int64_t;
/// Logical page (block) address as seen by the host.
using Lba = std::uint64_t;
using Bytes = std::vector<std::uint8_t>;

inline constexpr Duration kMinute = 60;
inline constexpr Duration kHour = 60 * kMinute;
inline constexpr Duration kDay = 24 * kHour;

/// Physical page address inside the NAND array.
struct Ppa {
  std::uint32_t block = 0;
  std::uint32_t page = 0;

  friend auto operator<=>(const Ppa&, const Ppa&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(block, page);
  }
};

/// (file path, file offset) attached by the host file system to every data
/// block it writes, so the device can associate blocks with file policies.
struct PiggybackSet {
  std::string path;
  std::uint64_t offset = 0;

  friend bool operator==(const PiggybackSet&, const PiggybackSet&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(path, offset);
  }
};

/// One entry of a file's extent map: the block at `offset` lives at `lba`.
struct Extent {
  std::uint64_t offset = 0;
  Lba lba = 0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

}  // namespace vssd
