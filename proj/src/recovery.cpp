#include "vssd/recovery.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "vssd/ftl.hpp"
#include "vssd/host_fs.hpp"

namespace vssd {

namespace {

bool page_of(const Ftl& ftl, Ppa ppa, std::string_view path) {
  const auto& oob = ftl.flash().read_oob(ppa);
  return oob.pbset && oob.pbset->path == path;
}

const GapFloor* gap_of(const PageShadow& s, std::string_view path) {
  for (const auto& g : s.gaps) {
    if (g.path == path) return &g;
  }
  return nullptr;
}

std::string join_offsets(const std::vector<std::uint64_t>& offsets) {
  std::string out;
  for (auto o : offsets) out += (out.empty() ? "" : ",") + std::to_string(o);
  return out;
}

enum class Outcome { kSelected, kFailed, kAbsent };

struct ChainResult {
  Outcome outcome = Outcome::kAbsent;
  Ppa ppa;
  /// Offset the chain belongs to (known whenever the chain touches the path).
  std::optional<std::uint64_t> offset;
};

// The chain's file offset: the newest page of the path, else a gap record.
std::optional<std::uint64_t> chain_offset(const Ftl& ftl, Ppa head,
                                          std::string_view path) {
  for (std::optional<Ppa> p = head; p; p = ftl.shadow(*p).bp) {
    if (page_of(ftl, *p, path)) return ftl.flash().read_oob(*p).pbset->offset;
    if (const auto* g = gap_of(ftl.shadow(*p), path)) return g->offset;
  }
  return std::nullopt;
}

ChainResult walk_time(const Ftl& ftl, Ppa head, std::string_view path,
                      Timestamp t, Timestamp now) {
  ChainResult r;
  r.offset = chain_offset(ftl, head, path);
  for (std::optional<Ppa> p = head; p; p = ftl.shadow(*p).bp) {
    const auto& s = ftl.shadow(*p);
    if (page_of(ftl, *p, path) && s.meta.wt <= t) {
      r.ppa = *p;
      r.outcome = ftl.eligible(*p, now) ? Outcome::kSelected : Outcome::kFailed;
      return r;
    }
    // Reclaimed pages of the path sat just below this one; if any of them
    // was written by t, the version we want is gone.
    if (const auto* g = gap_of(s, path); g && g->floor <= t) {
      r.outcome = Outcome::kFailed;
      return r;
    }
  }
  return r;
}

ChainResult walk_version(const Ftl& ftl, Ppa head, std::string_view path,
                         std::uint32_t ordinal, Timestamp now) {
  ChainResult r;
  r.offset = chain_offset(ftl, head, path);
  if (!r.offset) return r;
  std::uint32_t seen = 0;
  for (std::optional<Ppa> p = head; p; p = ftl.shadow(*p).bp) {
    if (!page_of(ftl, *p, path)) continue;
    const auto& s = ftl.shadow(*p);
    if (s.role == PageRole::kLive) {
      if (ordinal == 0) {
        r.ppa = *p;
        r.outcome = Outcome::kSelected;
        return r;
      }
      continue;
    }
    if (!ftl.eligible(*p, now)) continue;
    if (++seen == ordinal && ordinal > 0) {
      r.ppa = *p;
      r.outcome = Outcome::kSelected;
      return r;
    }
  }
  r.outcome = Outcome::kFailed;
  return r;
}

}  // namespace

std::string describe(const RecoveryTarget& target) {
  if (const auto* t = std::get_if<TimeTarget>(&target)) {
    return fmt::format("time={}", t->time);
  }
  return fmt::format("version={}", std::get<VersionTarget>(target).ordinal);
}

Bytes RecoveredImage::contents() const {
  Bytes out;
  for (const auto& c : chunks) out.insert(out.end(), c.data.begin(), c.data.end());
  return out;
}

RecoveryNotPossible::RecoveryNotPossible(std::string path,
                                         std::vector<std::uint64_t> offsets)
    : Error(Errc::kRecoveryNotPossible,
            path + ": no recoverable version at offsets " +
                join_offsets(offsets)),
      offsets_(std::move(offsets)) {}

std::vector<ChainHead> exhaustive_scan(const Ftl& ftl, std::string_view path) {
  const auto& g = ftl.geometry();
  std::set<Lba> lpas;
  // Newest page per LPA, by device write order.
  std::map<Lba, std::pair<std::uint64_t, Ppa>> newest;
  for (std::uint32_t b = 0; b < g.blocks; ++b) {
    for (std::uint32_t p = 0; p < g.pages_per_block; ++p) {
      const Ppa ppa{b, p};
      if (ftl.flash().state(ppa) != PageState::kProgrammed) continue;
      const auto& s = ftl.shadow(ppa);
      if (s.role == PageRole::kUnused) continue;
      if (page_of(ftl, ppa, path) || gap_of(s, path) != nullptr) {
        lpas.insert(s.lpa);
      }
      auto [it, inserted] = newest.try_emplace(s.lpa, s.seq, ppa);
      if (!inserted && s.seq > it->second.first) it->second = {s.seq, ppa};
    }
  }
  std::vector<ChainHead> heads;
  for (auto lpa : lpas) heads.push_back(ChainHead{lpa, newest.at(lpa).second});
  return heads;
}

RecoveredImage recover(const Ftl& ftl, const RecoveryRequest& req,
                       Timestamp now) {
  std::vector<ChainHead> heads;
  if (req.lba_list) {
    for (const auto& e : *req.lba_list) {
      if (auto live = ftl.live(e.lba)) heads.push_back(ChainHead{e.lba, *live});
    }
  } else {
    heads = exhaustive_scan(ftl, req.path);
  }

  std::map<std::uint64_t, RecoveredChunk> chosen;
  std::map<std::uint64_t, std::uint64_t> chosen_seq;
  std::set<std::uint64_t> failed;
  for (const auto& h : heads) {
    ChainResult r;
    if (const auto* t = std::get_if<TimeTarget>(&req.target)) {
      r = walk_time(ftl, h.head, req.path, t->time, now);
    } else {
      r = walk_version(ftl, h.head, req.path,
                       std::get<VersionTarget>(req.target).ordinal, now);
    }
    if (r.outcome == Outcome::kAbsent) continue;
    if (r.outcome == Outcome::kFailed) {
      failed.insert(r.offset.value_or(0));
      continue;
    }
    const auto view = ftl.flash().read_page(r.ppa);
    const auto offset = view.oob.pbset->offset;
    const auto seq = ftl.shadow(r.ppa).seq;
    // Two LBAs claiming one offset only happens under LBA tampering; the
    // newer write wins.
    if (auto it = chosen_seq.find(offset);
        it != chosen_seq.end() && it->second > seq) {
      continue;
    }
    chosen_seq[offset] = seq;
    chosen[offset] = RecoveredChunk{
        offset, Bytes(view.payload.begin(), view.payload.end()), r.ppa,
        ftl.shadow(r.ppa).meta.wt};
  }

  if (!failed.empty()) {
    throw RecoveryNotPossible(req.path,
                              std::vector<std::uint64_t>(failed.begin(),
                                                         failed.end()));
  }
  if (chosen.empty()) {
    throw Error(Errc::kFileUnknown,
                req.path + " had no blocks at " + describe(req.target));
  }

  RecoveredImage image;
  image.path = req.path;
  image.target = req.target;
  for (auto& [offset, chunk] : chosen) image.chunks.push_back(std::move(chunk));
  if (std::holds_alternative<VersionTarget>(req.target)) {
    for (const auto& c : image.chunks) {
      if (c.wt != image.chunks.front().wt) image.mixed_versions = true;
    }
  }
  return image;
}

RecoveryRequest make_recovery_request(const HostFs& fs, std::string path,
                                      RecoveryTarget target,
                                      bool use_lba_list) {
  RecoveryRequest req{std::move(path), target, std::nullopt};
  if (!use_lba_list) return req;
  try {
    req.lba_list = fs.lba_list(req.path);
  } catch (const Error& e) {
    if (e.code() != Errc::kFsCorrupted) throw;
  }
  return req;
}

void apply_recovery(HostFs& fs, const RecoveredImage& image) {
  if (image.chunks.empty()) {
    throw Error(Errc::kEmptyImage, image.path + ": nothing to restore");
  }
  for (const auto& c : image.chunks) fs.write(image.path, c.offset, c.data);
}

}  // namespace vssd
