#include "vssd/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <random>

#include "vssd/error.hpp"
#include "vssd/ftl.hpp"
#include "vssd/host_fs.hpp"

namespace vssd {

namespace {

constexpr std::uint64_t kEnd = std::numeric_limits<std::uint64_t>::max();

}  // namespace

std::string describe(const ProbeAnswer& answer) {
  if (const auto* c = std::get_if<ProbeContents>(&answer)) {
    return fmt::format("{} bytes", c->data.size());
  }
  if (const auto* u = std::get_if<ProbeUnrecoverable>(&answer)) {
    return fmt::format("unrecoverable at {}", fmt::join(u->offsets, ","));
  }
  return "no such file";
}

ProbeAnswer probe_device(const Ftl& ftl, const RecoveryRequest& req,
                         Timestamp now) {
  try {
    return ProbeContents{recover(ftl, req, now).contents()};
  } catch (const RecoveryNotPossible& e) {
    return ProbeUnrecoverable{e.offsets()};
  } catch (const Error& e) {
    if (e.code() != Errc::kFileUnknown) throw;
    return ProbeNoSuchFile{};
  }
}

void ShadowOracle::record_write(Timestamp t, const std::string& path,
                                std::uint64_t offset, Bytes data,
                                bool piggybacked) {
  const auto op = ++ops_;
  auto& chain = files_[path][offset];
  if (!chain.empty()) {
    chain.back().sup_op = op;
    chain.back().sup_time = t;
  }
  chain.push_back(Version{op, t, std::move(data), piggybacked, {}, 0});
}

ResponseStatus ShadowOracle::predict(const PolicyCommand& cmd) const {
  bool in_table = false;
  if (auto it = policy_log_.find(cmd.path); it != policy_log_.end()) {
    in_table = !it->second.empty() &&
               it->second.back().kind != CommandKind::kDelete;
  }
  if (cmd.kind == CommandKind::kCreate) {
    return in_table ? ResponseStatus::kDuplicatePolicy
                    : ResponseStatus::kSuccess;
  }
  return in_table ? ResponseStatus::kSuccess : ResponseStatus::kPolicyNotFound;
}

void ShadowOracle::record_policy(Timestamp t, const PolicyCommand& cmd) {
  policy_log_[cmd.path].push_back(PolicyEvent{++ops_, t, cmd.kind, cmd.cp});
}

std::optional<ConfigParams> ShadowOracle::cp_before(const std::string& path,
                                                    std::uint64_t op) const {
  if (almanac_rt_) return ConfigParams{*almanac_rt_, 0, 0};
  std::optional<ConfigParams> cp;
  auto it = policy_log_.find(path);
  if (it == policy_log_.end()) return cp;
  for (const auto& e : it->second) {
    if (e.op >= op) break;
    cp = e.kind == CommandKind::kDelete ? std::nullopt : e.cp;
  }
  return cp;
}

bool ShadowOracle::deleted_between(const std::string& path,
                                   std::uint64_t after,
                                   std::uint64_t before) const {
  if (almanac_rt_) return false;
  auto it = policy_log_.find(path);
  if (it == policy_log_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(), [&](const auto& e) {
    return e.kind == CommandKind::kDelete && e.op > after && e.op < before;
  });
}

// Kept when it was superseded: tagged, under a policy from its write to its
// supersession, and not dropped by the backup cycle.
bool ShadowOracle::retained(const std::string& path, const Version& v) const {
  if (!v.sup_op || !v.piggybacked) return false;
  if (!cp_before(path, v.op)) return false;
  if (deleted_between(path, v.op, *v.sup_op)) return false;
  const auto cp = cp_before(path, *v.sup_op);
  if (!cp) return false;
  return !(v.sup_time - v.wt < cp->bc);
}

bool ShadowOracle::entitled(const std::string& path, const Chain& chain,
                            std::size_t k, Timestamp now) const {
  const auto& v = chain[k];
  if (!v.sup_op) return true;
  if (!retained(path, v)) return false;
  if (deleted_between(path, v.op, kEnd)) return false;

  // Newer versions that were retained by the time `op` had happened.
  auto depth_at = [&](std::uint64_t op) {
    std::uint32_t d = 0;
    for (std::size_t j = k + 1; j < chain.size(); ++j) {
      if (chain[j].sup_op && *chain[j].sup_op <= op &&
          retained(path, chain[j])) {
        ++d;
      }
    }
    return d;
  };
  auto keeps = [&](const ConfigParams& cp, Timestamp t, std::uint32_t depth) {
    if (t - v.sup_time > cp.rt) return false;
    return !(cp.v_max > 0 && depth >= cp.v_max);
  };

  // Each CP in force since the supersession must have kept the version up
  // to the moment it was replaced.
  if (!almanac_rt_) {
    if (auto it = policy_log_.find(path); it != policy_log_.end()) {
      for (const auto& e : it->second) {
        if (e.op <= *v.sup_op || e.kind != CommandKind::kChange) continue;
        const auto old = cp_before(path, e.op);
        if (!old || !keeps(*old, e.time, depth_at(e.op))) return false;
      }
    }
  }
  const auto cur = cp_before(path, kEnd);
  return cur && keeps(*cur, now, depth_at(kEnd));
}

ProbeAnswer ShadowOracle::expected(const std::string& path,
                                   const RecoveryTarget& target,
                                   Timestamp now) const {
  auto file = files_.find(path);
  if (file == files_.end()) return ProbeNoSuchFile{};

  std::map<std::uint64_t, const Bytes*> chosen;
  std::vector<std::uint64_t> failed;
  for (const auto& [offset, chain] : file->second) {
    std::optional<std::size_t> pick;
    bool fail = false;
    if (const auto* t = std::get_if<TimeTarget>(&target)) {
      for (std::size_t k = chain.size(); k-- > 0;) {
        if (chain[k].piggybacked && chain[k].wt <= t->time) {
          pick = k;
          break;
        }
      }
      if (pick && !entitled(path, chain, *pick, now)) fail = true;
    } else {
      const auto ordinal = std::get<VersionTarget>(target).ordinal;
      const bool tagged = std::any_of(chain.begin(), chain.end(),
                                      [](const auto& v) { return v.piggybacked; });
      if (!tagged) continue;
      if (ordinal == 0) {
        if (chain.back().piggybacked) pick = chain.size() - 1;
      } else {
        std::uint32_t seen = 0;
        for (std::size_t k = chain.size() - 1; k-- > 0;) {
          if (!chain[k].piggybacked || !entitled(path, chain, k, now)) continue;
          if (++seen == ordinal) {
            pick = k;
            break;
          }
        }
      }
      if (!pick) fail = true;
    }
    if (fail) {
      failed.push_back(offset);
    } else if (pick) {
      chosen[offset] = &chain[*pick].data;
    }
  }
  if (!failed.empty()) return ProbeUnrecoverable{failed};
  if (chosen.empty()) return ProbeNoSuchFile{};
  ProbeContents out;
  for (const auto& [offset, data] : chosen) {
    out.data.insert(out.data.end(), data->begin(), data->end());
  }
  return out;
}

namespace {

struct FileSpec {
  std::string path;
  std::uint32_t pages = 1;
};

class RandomRun {
 public:
  explicit RandomRun(const RandomRunConfig& config)
      : config_(config), session_(config.geometry), rng_(config.seed) {
    // Prefix-sharing names make sure path matching is exact.
    static const char* const kNames[] = {
        "/data/f1",     "/data/f10",      "/data/f2",   "/home/a.txt",
        "/home/a.txt~", "/home/b/c.log",  "/var/db/x",  "/var/db/x.wal",
        "/tmp/t1",      "/tmp/t2",        "/srv/blob",  "/srv/blob2",
        "/never/written",
    };
    for (const char* name : kNames) {
      files_.push_back(FileSpec{name, static_cast<std::uint32_t>(uniform(1, 6))});
    }
    if (config_.gc_watch) {
      session_.device.ftl().set_gc_observer(
          [this](GcPhase phase, const Ftl& ftl) { watch(phase, ftl); });
    }
  }

  RandomRunReport run() {
    const std::size_t probe_every =
        config_.probes ? std::max<std::size_t>(1, config_.ops / config_.probes)
                       : 0;
    const std::size_t check_every =
        config_.checkpoints
            ? std::max<std::size_t>(1, config_.ops / config_.checkpoints)
            : 0;
    for (std::size_t i = 0; i < config_.ops; ++i) {
      step();
      ++report_.ops;
      if (probe_every && (i + 1) % probe_every == 0 &&
          report_.probes < config_.probes) {
        probe();
      }
      if (check_every && (i + 1) % check_every == 0 &&
          report_.scan_checks / files_.size() < config_.checkpoints) {
        scan_check();
      }
    }
    const auto& c = session_.device.ftl().counters();
    report_.gc_passes = c.gc_invocations;
    report_.ov_losses = c.ov_losses;
    session_.device.ftl().set_gc_observer(nullptr);
    return report_;
  }

 private:
  std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  template <class T, std::size_t N>
  const T& pick(const T (&items)[N]) {
    return items[static_cast<std::size_t>(uniform(0, N - 1))];
  }

  Timestamp now() const { return session_.device.now(); }

  void note(std::string text) {
    if (report_.notes.size() < 20) report_.notes.push_back(std::move(text));
  }

  void step() {
    const auto roll = uniform(0, 99);
    if (roll < 55) {
      write();
    } else if (roll < 68) {
      static const Duration kSteps[] = {kHour, 3 * kHour, 6 * kHour,
                                        12 * kHour, kDay, 2 * kDay};
      session_.device.advance_to(now() + pick(kSteps));
    } else if (roll < 80) {
      policy();
    } else if (roll < 82) {
      try {
        session_.device.gc();
      } catch (const Error& e) {
        if (e.code() != Errc::kNoVictimGain) throw;
      }
    } else {
      write();
    }
  }

  void write() {
    // The last name is never written.
    const auto& f = files_[static_cast<std::size_t>(
        uniform(0, static_cast<std::int64_t>(files_.size()) - 2))];
    const auto ps = config_.geometry.page_size;
    const auto first = static_cast<std::uint32_t>(uniform(0, f.pages - 1));
    const auto count = static_cast<std::uint32_t>(uniform(1, f.pages - first));
    for (std::uint32_t p = first; p < first + count; ++p) {
      Bytes data(ps);
      for (auto& b : data) b = static_cast<std::uint8_t>(uniform(0, 255));
      try {
        session_.fs.write(f.path, std::uint64_t{p} * ps, data);
      } catch (const Error& e) {
        if (e.code() != Errc::kDeviceFull) throw;
        ++report_.device_full;
        return;
      }
      oracle_.record_write(now(), f.path, std::uint64_t{p} * ps,
                           std::move(data));
      ++report_.page_writes;
    }
  }

  void policy() {
    static const Duration kRt[] = {6 * kHour, kDay, 2 * kDay, 4 * kDay};
    static const Duration kBc[] = {0, 0, 2 * kHour};
    static const std::uint32_t kV[] = {0, 0, 2, 4};
    const auto& f = files_[static_cast<std::size_t>(
        uniform(0, static_cast<std::int64_t>(files_.size()) - 1))];
    const ConfigParams cp{pick(kRt), pick(kBc), pick(kV)};
    const auto roll = uniform(0, 9);
    const auto cmd = roll < 5   ? PolicyCommand::create(f.path, cp)
                     : roll < 8 ? PolicyCommand::change(f.path, cp)
                                : PolicyCommand::remove(f.path);
    const auto want = oracle_.predict(cmd);
    const auto got = session_.policy(cmd).status;
    ++report_.policy_commands;
    if (got != want) {
      ++report_.policy_mismatches;
      note(fmt::format("policy {} {}: device {}, oracle {}",
                       command_kind_name(cmd.kind), cmd.path,
                       response_status_name(got), response_status_name(want)));
    }
    if (got == ResponseStatus::kSuccess) oracle_.record_policy(now(), cmd);
  }

  RecoveryTarget random_target() {
    if (uniform(0, 4) == 0) {
      return VersionTarget{static_cast<std::uint32_t>(uniform(0, 3))};
    }
    return TimeTarget{std::max<Timestamp>(0, now() - uniform(0, 4 * kDay))};
  }

  void probe() {
    const auto& f = files_[static_cast<std::size_t>(
        uniform(0, static_cast<std::int64_t>(files_.size()) - 1))];
    const auto target = random_target();
    const auto req = make_recovery_request(session_.fs, f.path, target, true);
    const auto got = probe_device(session_.device.ftl(), req, now());
    const auto want = oracle_.expected(f.path, target, now());
    ++report_.probes;
    if (std::holds_alternative<ProbeContents>(got)) ++report_.probes_recovered;
    if (std::holds_alternative<ProbeUnrecoverable>(got)) {
      ++report_.probes_unrecoverable;
    }
    if (got != want) {
      ++report_.probe_mismatches;
      note(fmt::format("probe {} {} at {}: device {}, oracle {}", f.path,
                       vssd::describe(target), now(), describe(got),
                       describe(want)));
    }
  }

  void scan_check() {
    for (const auto& f : files_) {
      const auto target = random_target();
      const auto list = make_recovery_request(session_.fs, f.path, target, true);
      auto scan = list;
      scan.lba_list.reset();
      const auto& ftl = session_.device.ftl();
      const auto a = probe_device(ftl, list, now());
      const auto b = probe_device(ftl, scan, now());
      ++report_.scan_checks;
      if (a != b) {
        ++report_.scan_mismatches;
        note(fmt::format("scan/list {} {}: list {}, scan {}", f.path,
                         vssd::describe(target), describe(a), describe(b)));
      }
    }
  }

  std::vector<ProbeAnswer> watch_set(const Ftl& ftl) {
    std::vector<ProbeAnswer> out;
    const Timestamp t = now();
    for (const auto& f : files_) {
      const RecoveryTarget targets[] = {
          TimeTarget{t},
          TimeTarget{std::max<Timestamp>(0, t - kDay)},
          TimeTarget{std::max<Timestamp>(0, t - 2 * kDay)},
          TimeTarget{std::max<Timestamp>(0, t - 4 * kDay)},
          VersionTarget{1},
          VersionTarget{2},
      };
      for (const auto& target : targets) {
        out.push_back(probe_device(
            ftl, make_recovery_request(session_.fs, f.path, target, true), t));
      }
    }
    return out;
  }

  void watch(GcPhase phase, const Ftl& ftl) {
    if (phase == GcPhase::kBegin) {
      before_ = watch_set(ftl);
      return;
    }
    ++report_.gc_checks;
    if (watch_set(ftl) != before_) {
      ++report_.gc_violations;
      note(fmt::format("gc pass {} changed a recovery answer",
                       ftl.counters().gc_invocations));
    }
  }

  RandomRunConfig config_;
  Session session_;
  ShadowOracle oracle_;
  std::mt19937_64 rng_;
  std::vector<FileSpec> files_;
  std::vector<ProbeAnswer> before_;
  RandomRunReport report_;
};

}  // namespace

RandomRunReport run_random(const RandomRunConfig& config) {
  RandomRun run(config);
  return run.run();
}

}  // namespace vssd
