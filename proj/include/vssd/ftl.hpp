#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vssd/flash.hpp"
#include "vssd/policy.hpp"
#include "vssd/types.hpp"

namespace vssd {

enum class PageRole : std::uint8_t { kUnused, kLive, kSuperseded };

enum class PageClass : std::uint8_t { kValid, kInvalid, kOvPage };

std::string_view page_class_name(PageClass c) noexcept;

/// Oldest write time among reclaimed pages of `path` that were spliced out of
/// a chain just below the page holding this record.
struct GapFloor {
  std::string path;
  Timestamp floor = 0;
  /// File offset the reclaimed pages carried.
  std::uint64_t offset = 0;

  friend bool operator==(const GapFloor&, const GapFloor&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(path, floor, offset);
  }
};

/// DRAM-side state of one physical page. The back pointer here is the
/// authoritative one: OOB is immutable once programmed, so chain repairs after
/// relocation or reclamation land here.
struct PageShadow {
  PageRole role = PageRole::kUnused;
  Lba lpa = 0;
  /// Device-wide write order; breaks ties between equal write times.
  std::uint64_t seq = 0;
  PageVersionMeta meta;
  /// Previous version of the same LPA (kept even when the OOB carries none).
  std::optional<Ppa> bp;
  /// Next version of the same LPA (reverse index of bp).
  std::optional<Ppa> succ;
  std::vector<GapFloor> gaps;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(role, lpa, seq, meta, bp, succ, gaps);
  }
};

struct GcReport {
  std::uint32_t victim_block = 0;
  std::uint32_t relocated_valid = 0;
  std::uint32_t relocated_ov = 0;
  std::uint32_t reclaimed_invalid = 0;
  std::uint32_t reclaimed_expired = 0;

  std::uint32_t examined() const {
    return relocated_valid + relocated_ov + reclaimed_invalid +
           reclaimed_expired;
  }
  friend bool operator==(const GcReport&, const GcReport&) = default;
};

struct FtlCounters {
  std::uint64_t host_pages_written = 0;
  std::uint64_t gc_invocations = 0;
  std::uint64_t relocated_valid = 0;
  std::uint64_t relocated_ov = 0;
  std::uint64_t reclaimed_invalid = 0;
  std::uint64_t reclaimed_expired = 0;
  /// OV pages found unrelocated in a victim at erase time. Must stay 0.
  std::uint64_t ov_losses = 0;

  friend bool operator==(const FtlCounters&, const FtlCounters&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(host_pages_written, gc_invocations, relocated_valid, relocated_ov,
       reclaimed_invalid, reclaimed_expired, ov_losses);
  }
};

enum class GcPhase : std::uint8_t { kBegin, kEnd };

/// Page-mapping FTL with version chains, a Version Validity Bitmap and
/// selective-versioning garbage collection.
///
/// Writes go to a single write frontier shared with GC relocation. One free
/// block is held back for relocation; a host write that would consume it
/// runs GC first.
class Ftl {
 public:
  explicit Ftl(FlashGeometry geometry);

  /// Out-of-place write. Throws kDeviceFull, kPathTooLong, kPayloadTooLarge.
  /// The call has no effect when it throws.
  Ppa write(Lba lba, std::span<const std::uint8_t> payload,
            const std::optional<PiggybackSet>& pbset, Timestamp now);

  /// Live contents of `lba`. Throws kUnmappedLba.
  Bytes read(Lba lba) const;

  /// VALID / INVALID / OV_PAGE. A page whose policy no longer requires it has
  /// its VVB bit cleared. Throws kClassifyFreePage.
  PageClass classify_page(Ppa ppa, Timestamp now);
  /// Same verdict as classify_page without touching the VVB.
  PageClass peek_class(Ppa ppa, Timestamp now) const;

  /// One greedy GC pass. Throws kNoVictimGain if no block has a reclaimable
  /// page.
  GcReport garbage_collect(Timestamp now);

  /// Clears the VVB of every page attributed to `path`. Returns how many of
  /// them were superseded versions.
  std::size_t purge_file(const std::string& path);

  /// Applies an authenticated policy command: CHANGE first retires pages the
  /// old CP no longer protects, DELETE purges the file's versions.
  /// Throws kDuplicatePolicy / kPolicyNotFound / kMalformedCommand.
  void apply_policy(const PolicyCommand& cmd, Timestamp now);

  /// Almanac mode: every piggybacked page is governed by `cp`, regardless of
  /// the policy table. nullopt restores per-file policies.
  void set_uniform_policy(std::optional<ConfigParams> cp);
  const std::optional<PolicyEntry>& uniform_policy() const {
    return uniform_policy_;
  }

  /// Policy governing pages of `path` right now (nullptr if none).
  const PolicyEntry* policy_for(const std::string& path) const;
  /// True for the live page and for superseded pages still entitled to
  /// preservation at `now`.
  bool eligible(Ppa ppa, Timestamp now) const;

  const FlashArray& flash() const { return flash_; }
  const FlashGeometry& geometry() const { return flash_.geometry(); }
  const PolicyTable& policies() const { return policies_; }
  const PageShadow& shadow(Ppa ppa) const {
    return shadow_[geometry().index_of(ppa)];
  }
  bool vvb(Ppa ppa) const { return vvb_[geometry().index_of(ppa)]; }
  std::optional<Ppa> live(Lba lba) const;
  std::size_t mapped_lbas() const { return mapping_.size(); }

  const FtlCounters& counters() const { return counters_; }
  std::uint64_t nand_pages_programmed() const { return flash_.programs(); }
  /// Superseded pages whose VVB bit is still set.
  std::size_t ov_pages_resident() const;
  std::size_t free_blocks() const { return free_blocks_.size(); }

  /// Called at the start and end of every GC pass (state is consistent at
  /// both points).
  void set_gc_observer(std::function<void(GcPhase, const Ftl&)> observer) {
    gc_observer_ = std::move(observer);
  }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(flash_, shadow_, vvb_, mapping_, policies_, uniform_policy_,
       free_blocks_, open_block_, open_next_, write_seq_, counters_);
  }

 private:
  const PolicyEntry* policy_for_page(Ppa ppa) const;
  PreserveVerdict judge(Ppa ppa, Timestamp now) const;
  std::size_t writable_pages() const;
  void make_room(Timestamp now);
  Ppa allocate_page();
  void supersede(Ppa prev, Ppa next, Timestamp now);
  void splice_out(Ppa dead);
  void relocate(Ppa from);
  std::size_t idx(Ppa ppa) const { return geometry().index_of(ppa); }

  FlashArray flash_;
  std::vector<PageShadow> shadow_;
  std::vector<bool> vvb_;
  std::map<Lba, Ppa> mapping_;
  PolicyTable policies_;
  std::optional<PolicyEntry> uniform_policy_;
  std::deque<std::uint32_t> free_blocks_;
  std::optional<std::uint32_t> open_block_;
  std::uint32_t open_next_ = 0;
  std::uint64_t write_seq_ = 0;
  FtlCounters counters_;
  std::function<void(GcPhase, const Ftl&)> gc_observer_;
};

}  // namespace vssd
