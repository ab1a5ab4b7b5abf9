#include "vssd/policy.hpp"

#include <algorithm>
#include <sstream>

#include "vssd/error.hpp"

namespace vssd {

std::string_view command_kind_name(CommandKind kind) noexcept {
  switch (kind) {
    case CommandKind::kCreate: return "CREATE";
    case CommandKind::kChange: return "CHANGE";
    case CommandKind::kDelete: return "DELETE";
  }
  return "?";
}

std::string_view reclaim_reason_name(ReclaimReason reason) noexcept {
  switch (reason) {
    case ReclaimReason::kNone: return "none";
    case ReclaimReason::kNoPolicy: return "no-policy";
    case ReclaimReason::kCoalesced: return "coalesced";
    case ReclaimReason::kExpired: return "expired";
    case ReclaimReason::kVersionCap: return "version-cap";
  }
  return "?";
}

void PolicyCommand::validate() const {
  if (path.empty()) {
    throw Error(Errc::kMalformedCommand, "empty file path");
  }
  if ((kind == CommandKind::kDelete) == cp.has_value()) {
    throw Error(Errc::kMalformedCommand,
                "CP must be present exactly when the command is not DELETE");
  }
  if (cp && (cp->rt < 0 || cp->bc < 0)) {
    throw Error(Errc::kMalformedCommand, "negative duration in CP");
  }
}

PreserveVerdict is_preservable(const PageVersionMeta& meta,
                               const PolicyEntry* entry, Timestamp now) {
  if (!meta.invalidated_at) {
    throw Error(Errc::kJudgedLivePage, "page is still the live version");
  }
  if (entry == nullptr) return {false, ReclaimReason::kNoPolicy};
  if (meta.coalesced) return {false, ReclaimReason::kCoalesced};
  // Strict: recovery is guaranteed for the full RT, endpoint included.
  if (now - *meta.invalidated_at > entry->cp.rt) {
    return {false, ReclaimReason::kExpired};
  }
  if (entry->cp.v_max > 0 && meta.chain_depth >= entry->cp.v_max) {
    return {false, ReclaimReason::kVersionCap};
  }
  return {true, ReclaimReason::kNone};
}

bool is_coalesced(Timestamp wt, Timestamp superseded_at,
                  const ConfigParams& cp) noexcept {
  return cp.bc > 0 && superseded_at - wt < cp.bc;
}

ApplyOutcome PolicyTable::apply(const PolicyCommand& cmd, Timestamp now) {
  cmd.validate();
  auto it = entries_.find(cmd.path);
  switch (cmd.kind) {
    case CommandKind::kCreate:
      if (it != entries_.end()) {
        throw Error(Errc::kDuplicatePolicy, cmd.path);
      }
      entries_.emplace(cmd.path, PolicyEntry{cmd.path, *cmd.cp, now});
      return {};
    case CommandKind::kChange:
      if (it == entries_.end()) throw Error(Errc::kPolicyNotFound, cmd.path);
      it->second.cp = *cmd.cp;
      it->second.created_at = now;
      return {};
    case CommandKind::kDelete:
      if (it == entries_.end()) throw Error(Errc::kPolicyNotFound, cmd.path);
      entries_.erase(it);
      return {cmd.path};
  }
  return {};
}

const PolicyEntry* PolicyTable::lookup(const std::string& path) const {
  auto it = entries_.find(path);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<PolicyEntry> PolicyTable::entries() const {
  std::vector<PolicyEntry> out;
  out.reserve(entries_.size());
  for (const auto& [path, entry] : entries_) out.push_back(entry);
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

std::string PolicyTable::dump() const {
  std::ostringstream os;
  for (const auto& e : entries()) {
    os << e.path << '\t' << e.cp.rt << '\t' << e.cp.bc << '\t' << e.cp.v_max
       << '\t' << e.created_at << '\n';
  }
  return os.str();
}

}  // namespace vssd
