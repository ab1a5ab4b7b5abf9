#include "vssd/ftl.hpp"

#include <algorithm>
#include <string>

#include "vssd/error.hpp"

namespace vssd {

namespace {

constexpr std::size_t kReservedBlocks = 1;

void lower_floor(std::vector<GapFloor>& gaps, const std::string& path,
                 Timestamp floor, std::uint64_t offset) {
  for (auto& g : gaps) {
    if (g.path == path) {
      g.floor = std::min(g.floor, floor);
      return;
    }
  }
  gaps.push_back(GapFloor{path, floor, offset});
}

}  // namespace

std::string_view page_class_name(PageClass c) noexcept {
  switch (c) {
    case PageClass::kValid: return "VALID";
    case PageClass::kInvalid: return "INVALID";
    case PageClass::kOvPage: return "OV_PAGE";
  }
  return "?";
}

Ftl::Ftl(FlashGeometry geometry) : flash_(geometry) {
  const auto n = flash_.geometry().total_pages();
  shadow_.resize(n);
  vvb_.assign(n, false);
  for (std::uint32_t b = 0; b < flash_.geometry().blocks; ++b) {
    free_blocks_.push_back(b);
  }
}

std::optional<Ppa> Ftl::live(Lba lba) const {
  auto it = mapping_.find(lba);
  if (it == mapping_.end()) return std::nullopt;
  return it->second;
}

const PolicyEntry* Ftl::policy_for(const std::string& path) const {
  if (uniform_policy_) return &*uniform_policy_;
  return policies_.lookup(path);
}

const PolicyEntry* Ftl::policy_for_page(Ppa ppa) const {
  const auto& oob = flash_.read_oob(ppa);
  if (!oob.pbset) return nullptr;
  return policy_for(oob.pbset->path);
}

void Ftl::set_uniform_policy(std::optional<ConfigParams> cp) {
  if (cp) {
    uniform_policy_ = PolicyEntry{"*", *cp, 0};
  } else {
    uniform_policy_.reset();
  }
}

PreserveVerdict Ftl::judge(Ppa ppa, Timestamp now) const {
  return is_preservable(shadow(ppa).meta, policy_for_page(ppa), now);
}

bool Ftl::eligible(Ppa ppa, Timestamp now) const {
  const auto& s = shadow(ppa);
  if (s.role == PageRole::kLive) return true;
  if (s.role != PageRole::kSuperseded || !vvb(ppa)) return false;
  return judge(ppa, now).preserve;
}

PageClass Ftl::peek_class(Ppa ppa, Timestamp now) const {
  if (flash_.state(ppa) != PageState::kProgrammed) {
    throw Error(Errc::kClassifyFreePage,
                "ppa (" + std::to_string(ppa.block) + "," +
                    std::to_string(ppa.page) + ")");
  }
  const auto& s = shadow(ppa);
  if (s.role == PageRole::kLive) return PageClass::kValid;
  if (s.role != PageRole::kSuperseded || !vvb(ppa)) return PageClass::kInvalid;
  return judge(ppa, now).preserve ? PageClass::kOvPage : PageClass::kInvalid;
}

PageClass Ftl::classify_page(Ppa ppa, Timestamp now) {
  const auto c = peek_class(ppa, now);
  if (c == PageClass::kInvalid) vvb_[idx(ppa)] = false;
  return c;
}

std::size_t Ftl::ov_pages_resident() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < shadow_.size(); ++i) {
    if (shadow_[i].role == PageRole::kSuperseded && vvb_[i]) ++n;
  }
  return n;
}

std::size_t Ftl::writable_pages() const {
  const auto ppb = geometry().pages_per_block;
  return (open_block_ ? ppb - open_next_ : 0) + free_blocks_.size() * ppb;
}

Ppa Ftl::allocate_page() {
  const auto ppb = geometry().pages_per_block;
  if (!open_block_ || open_next_ == ppb) {
    if (free_blocks_.empty()) {
      throw Error(Errc::kDeviceFull, "no free block to open");
    }
    open_block_ = free_blocks_.front();
    free_blocks_.pop_front();
    open_next_ = 0;
  }
  return Ppa{*open_block_, open_next_++};
}

void Ftl::make_room(Timestamp now) {
  const auto ppb = geometry().pages_per_block;
  while (!(open_block_ && open_next_ < ppb) &&
         free_blocks_.size() <= kReservedBlocks) {
    try {
      garbage_collect(now);
    } catch (const Error& e) {
      if (e.code() != Errc::kNoVictimGain) throw;
      throw Error(Errc::kDeviceFull,
                  "every block is saturated with valid and OV pages");
    }
  }
}

Ppa Ftl::write(Lba lba, std::span<const std::uint8_t> payload,
               const std::optional<PiggybackSet>& pbset, Timestamp now) {
  if (payload.size() > geometry().page_size) {
    throw Error(Errc::kPayloadTooLarge,
                std::to_string(payload.size()) + " > " +
                    std::to_string(geometry().page_size));
  }
  if (pbset && pbset->path.size() > geometry().max_path_len) {
    throw Error(Errc::kPathTooLong, pbset->path);
  }
  make_room(now);

  const auto prev = live(lba);
  const bool versioned = pbset && policy_for(pbset->path) != nullptr;
  OobRecord oob;
  oob.lpa = lba;
  if (pbset) {
    oob.wt = now;
    oob.bp = prev;
    oob.pbset = pbset;
  }
  const Ppa ppa = allocate_page();
  flash_.program_page(ppa, payload, std::move(oob));

  auto& s = shadow_[idx(ppa)];
  s = PageShadow{};
  s.role = PageRole::kLive;
  s.lpa = lba;
  s.seq = ++write_seq_;
  s.meta.wt = now;
  s.bp = prev;
  vvb_[idx(ppa)] = versioned;

  if (prev) supersede(*prev, ppa, now);
  mapping_[lba] = ppa;
  ++counters_.host_pages_written;
  return ppa;
}

void Ftl::supersede(Ppa prev, Ppa next, Timestamp now) {
  auto& s = shadow_[idx(prev)];
  s.role = PageRole::kSuperseded;
  s.meta.invalidated_at = now;
  s.succ = next;
  if (!vvb_[idx(prev)]) return;

  const PolicyEntry* entry = policy_for_page(prev);
  if (entry == nullptr) {
    vvb_[idx(prev)] = false;
    return;
  }
  if (is_coalesced(s.meta.wt, now, entry->cp)) {
    s.meta.coalesced = true;
    vvb_[idx(prev)] = false;
    return;
  }
  // A new old version was retained: every older retained one moves one
  // step further from the head of the chain.
  for (auto q = s.bp; q; q = shadow_[idx(*q)].bp) {
    if (vvb_[idx(*q)]) ++shadow_[idx(*q)].meta.chain_depth;
  }
}

Bytes Ftl::read(Lba lba) const {
  const auto ppa = live(lba);
  if (!ppa) throw Error(Errc::kUnmappedLba, std::to_string(lba));
  const auto view = flash_.read_page(*ppa);
  return Bytes(view.payload.begin(), view.payload.end());
}

void Ftl::splice_out(Ppa dead) {
  auto& d = shadow_[idx(dead)];
  if (d.succ) {
    auto& next = shadow_[idx(*d.succ)];
    next.bp = d.bp;
    for (const auto& g : d.gaps) lower_floor(next.gaps, g.path, g.floor, g.offset);
    const auto& oob = flash_.read_oob(dead);
    if (oob.pbset) lower_floor(next.gaps, oob.pbset->path, d.meta.wt, oob.pbset->offset);
  }
  if (d.bp) shadow_[idx(*d.bp)].succ = d.succ;
  d = PageShadow{};
  vvb_[idx(dead)] = false;
}

void Ftl::relocate(Ppa from) {
  const auto view = flash_.read_page(from);
  const Bytes payload(view.payload.begin(), view.payload.end());
  OobRecord oob = view.oob;
  if (oob.pbset) oob.bp = shadow(from).bp;

  const Ppa to = allocate_page();
  flash_.program_page(to, payload, std::move(oob));
  shadow_[idx(to)] = std::move(shadow_[idx(from)]);
  shadow_[idx(from)] = PageShadow{};
  vvb_[idx(to)] = vvb_[idx(from)];
  vvb_[idx(from)] = false;

  const auto& s = shadow_[idx(to)];
  if (s.bp) shadow_[idx(*s.bp)].succ = to;
  if (s.succ) shadow_[idx(*s.succ)].bp = to;
  if (s.role == PageRole::kLive) mapping_[s.lpa] = to;
}

GcReport Ftl::garbage_collect(Timestamp now) {
  const auto& g = geometry();
  if (gc_observer_) gc_observer_(GcPhase::kBegin, *this);

  // Greedy: most reclaimable pages wins, lowest index on ties.
  std::optional<std::uint32_t> victim;
  std::uint32_t best = 0;
  for (std::uint32_t b = 0; b < g.blocks; ++b) {
    std::uint32_t reclaimable = 0;
    for (std::uint32_t p = 0; p < g.pages_per_block; ++p) {
      const Ppa ppa{b, p};
      if (flash_.state(ppa) != PageState::kProgrammed) continue;
      if (peek_class(ppa, now) == PageClass::kInvalid) ++reclaimable;
    }
    if (reclaimable > best) {
      best = reclaimable;
      victim = b;
    }
  }
  if (!victim) {
    throw Error(Errc::kNoVictimGain, "no block holds a reclaimable page");
  }
  if (open_block_ == victim) open_block_.reset();

  GcReport report;
  report.victim_block = *victim;
  std::vector<Ppa> survivors;
  for (std::uint32_t p = 0; p < g.pages_per_block; ++p) {
    const Ppa ppa{*victim, p};
    if (flash_.state(ppa) != PageState::kProgrammed) continue;
    const bool had_vvb = vvb(ppa);
    switch (classify_page(ppa, now)) {
      case PageClass::kValid:
        ++report.relocated_valid;
        survivors.push_back(ppa);
        break;
      case PageClass::kOvPage:
        ++report.relocated_ov;
        survivors.push_back(ppa);
        break;
      case PageClass::kInvalid:
        if (had_vvb) {
          ++report.reclaimed_expired;
        } else {
          ++report.reclaimed_invalid;
        }
        splice_out(ppa);
        break;
    }
  }
  for (const auto& ppa : survivors) relocate(ppa);

  for (std::uint32_t p = 0; p < g.pages_per_block; ++p) {
    const auto& s = shadow(Ppa{*victim, p});
    if (s.role != PageRole::kUnused) ++counters_.ov_losses;
  }
  flash_.erase_block(*victim);
  free_blocks_.push_back(*victim);

  ++counters_.gc_invocations;
  counters_.relocated_valid += report.relocated_valid;
  counters_.relocated_ov += report.relocated_ov;
  counters_.reclaimed_invalid += report.reclaimed_invalid;
  counters_.reclaimed_expired += report.reclaimed_expired;
  if (gc_observer_) gc_observer_(GcPhase::kEnd, *this);
  return report;
}

std::size_t Ftl::purge_file(const std::string& path) {
  std::size_t superseded = 0;
  for (std::size_t i = 0; i < shadow_.size(); ++i) {
    if (!vvb_[i] || shadow_[i].role == PageRole::kUnused) continue;
    const auto& oob = flash_.read_oob(geometry().ppa_at(i));
    if (!oob.pbset || oob.pbset->path != path) continue;
    vvb_[i] = false;
    if (shadow_[i].role == PageRole::kSuperseded) ++superseded;
  }
  return superseded;
}

void Ftl::apply_policy(const PolicyCommand& cmd, Timestamp now) {
  cmd.validate();
  if (cmd.kind == CommandKind::kChange && !uniform_policy_) {
    const PolicyEntry* old = policies_.lookup(cmd.path);
    if (old == nullptr) throw Error(Errc::kPolicyNotFound, cmd.path);
    // Versions the old CP already gave up on stay gone under the new one.
    for (std::size_t i = 0; i < shadow_.size(); ++i) {
      if (!vvb_[i] || shadow_[i].role != PageRole::kSuperseded) continue;
      const auto& oob = flash_.read_oob(geometry().ppa_at(i));
      if (!oob.pbset || oob.pbset->path != cmd.path) continue;
      if (!is_preservable(shadow_[i].meta, old, now).preserve) vvb_[i] = false;
    }
  }
  const auto outcome = policies_.apply(cmd, now);
  if (outcome.purge_path && !uniform_policy_) purge_file(*outcome.purge_path);
}

}  // namespace vssd
