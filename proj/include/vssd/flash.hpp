#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "vssd/types.hpp"

namespace vssd {

struct FlashGeometry {
  std::uint32_t blocks = 64;
  std::uint32_t pages_per_block = 64;
  std::uint32_t page_size = 4096;
  /// Longest file path that fits in a page's OOB record.
  std::uint32_t max_path_len = 256;

  /// Throws Errc::kInvalidGeometry unless blocks >= 2, pages >= 1, size >= 1.
  void validate() const;

  std::uint64_t total_pages() const {
    return std::uint64_t{blocks} * pages_per_block;
  }
  std::uint64_t index_of(Ppa ppa) const {
    return std::uint64_t{ppa.block} * pages_per_block + ppa.page;
  }
  Ppa ppa_at(std::uint64_t index) const {
    return Ppa{static_cast<std::uint32_t>(index / pages_per_block),
               static_cast<std::uint32_t>(index % pages_per_block)};
  }
  bool contains(Ppa ppa) const {
    return ppa.block < blocks && ppa.page < pages_per_block;
  }

  friend bool operator==(const FlashGeometry&, const FlashGeometry&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(blocks, pages_per_block, page_size, max_path_len);
  }
};

/// Parses "BxPxS" (blocks x pages-per-block x page-size).
FlashGeometry parse_geometry(std::string_view text);

/// Per-page spare-area record. Kept as a structured value; no byte layout is
/// implied. When pbset is absent only the LPA is meaningful.
struct OobRecord {
  std::optional<Lba> lpa;
  Timestamp wt = 0;
  std::optional<Ppa> bp;
  std::optional<PiggybackSet> pbset;

  friend bool operator==(const OobRecord&, const OobRecord&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(lpa, wt, bp, pbset);
  }
};

enum class PageState : std::uint8_t { kFree, kProgrammed };

struct PageView {
  std::span<const std::uint8_t> payload;
  const OobRecord& oob;
};

/// Raw NAND: program-once pages, whole-block erase, per-page OOB.
class FlashArray {
 public:
  explicit FlashArray(FlashGeometry geometry);

  const FlashGeometry& geometry() const { return geometry_; }

  void program_page(Ppa addr, std::span<const std::uint8_t> payload,
                    OobRecord oob);
  PageView read_page(Ppa addr) const;
  const OobRecord& read_oob(Ppa addr) const;
  void erase_block(std::uint32_t block);

  PageState state(Ppa addr) const;
  std::uint32_t erase_count(std::uint32_t block) const;
  std::uint64_t programs() const { return programs_; }
  std::uint64_t erases() const { return erases_; }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(geometry_, data_, lengths_, oob_, state_, erase_counts_, programs_,
       erases_);
  }

 private:
  void check(Ppa addr) const;

  FlashGeometry geometry_;
  std::vector<std::uint8_t> data_;
  std::vector<std::uint32_t> lengths_;
  std::vector<OobRecord> oob_;
  std::vector<PageState> state_;
  std::vector<std::uint32_t> erase_counts_;
  std::uint64_t programs_ = 0;
  std::uint64_t erases_ = 0;
};

}  // namespace vssd
