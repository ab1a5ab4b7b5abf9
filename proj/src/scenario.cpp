#include "vssd/scenario.hpp"

#include <fmt/format.h>

#include <charconv>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <variant>

#include "vssd/device.hpp"
#include "vssd/duration.hpp"
#include "vssd/error.hpp"
#include "vssd/host_fs.hpp"
#include "vssd/recovery.hpp"

namespace vssd {

namespace {

struct GeometryStep {
  FlashGeometry geometry;
};
struct ClockStep {
  bool absolute = false;
  Timestamp value = 0;
};
struct ModeStep {
  std::optional<Duration> almanac_rt;
};
struct PolicyStep {
  PolicyCommand cmd;
  ResponseStatus expect = ResponseStatus::kSuccess;
};
struct WriteStep {
  std::string path;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::string pattern;
};
struct ReadStep {
  std::string path;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  bool negate = false;
  std::string pattern;
};
struct AttackStep {
  std::string flag;
  bool on = false;
};
struct CorruptStep {};
struct ForgeStep {
  std::string path;
  std::string method;
  ResponseStatus expect = ResponseStatus::kMacVerificationFailed;
};
struct DeviceStep {
  Request request;
};
struct GcStep {};
enum class RecoverExpect { kOk, kOkNot, kFail, kUnknown };
struct RecoverStep {
  std::string path;
  RecoveryTarget target;
  bool scan = false;
  bool apply = false;
  RecoverExpect expect = RecoverExpect::kOk;
  std::optional<std::string> pattern;
};
struct AssertOvStep {
  std::size_t count = 0;
  std::vector<std::string> paths;
};
struct AssertPolicyStep {
  std::string path;
  bool present = true;
};

using Step = std::variant<GeometryStep, ClockStep, ModeStep, PolicyStep,
                          WriteStep, ReadStep, AttackStep, CorruptStep,
                          ForgeStep, DeviceStep, GcStep, RecoverStep,
                          AssertOvStep, AssertPolicyStep>;

struct Line {
  std::size_t number = 0;
  std::string text;
  Step step;
};

// Thrown by the line parsers; decorated with the line number by the caller.
struct Bad : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Bad("expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

Duration to_duration(const std::string& s) {
  try {
    return parse_duration(s);
  } catch (const std::invalid_argument&) {
    throw Bad("bad duration '" + s + "'");
  }
}

Timestamp to_time(const std::string& s) {
  try {
    return parse_time(s);
  } catch (const std::invalid_argument&) {
    throw Bad("bad time '" + s + "'");
  }
}

ResponseStatus to_status(const std::string& s) {
  static const std::map<std::string, ResponseStatus, std::less<>> kNames{
      {"success", ResponseStatus::kSuccess},
      {"duplicate-policy", ResponseStatus::kDuplicatePolicy},
      {"policy-not-found", ResponseStatus::kPolicyNotFound},
      {"malformed", ResponseStatus::kMalformed},
      {"mac-failure", ResponseStatus::kMacVerificationFailed},
      {"replayed", ResponseStatus::kReplayed},
  };
  auto it = kNames.find(s);
  if (it == kNames.end()) throw Bad("unknown status '" + s + "'");
  return it->second;
}

void need(const std::vector<std::string>& t, std::size_t lo, std::size_t hi) {
  if (t.size() < lo || t.size() > hi) {
    throw Bad(fmt::format("'{}' takes {} to {} arguments, got {}", t[0],
                          lo - 1, hi - 1, t.size() - 1));
  }
}

// Optional trailing "expect <status>" starting at index i.
ResponseStatus trailing_status(const std::vector<std::string>& t,
                               std::size_t i, ResponseStatus fallback) {
  if (t.size() == i) return fallback;
  if (t.size() != i + 2 || t[i] != "expect") {
    throw Bad("expected 'expect <status>' after the arguments");
  }
  return to_status(t[i + 1]);
}

Step parse_policy(const std::vector<std::string>& t) {
  if (t.size() < 3) throw Bad("policy needs a verb and a path");
  const auto& verb = t[1];
  const auto& path = t[2];
  if (verb == "delete") {
    return PolicyStep{PolicyCommand::remove(path),
                      trailing_status(t, 3, ResponseStatus::kSuccess)};
  }
  if (verb != "create" && verb != "change") {
    throw Bad("policy verb must be create, change or delete");
  }
  if (t.size() < 6) throw Bad("policy " + verb + " needs <path> <rt> <bc> <v>");
  ConfigParams cp{to_duration(t[3]), to_duration(t[4]),
                  static_cast<std::uint32_t>(to_u64(t[5]))};
  auto cmd = verb == "create" ? PolicyCommand::create(path, cp)
                              : PolicyCommand::change(path, cp);
  return PolicyStep{cmd, trailing_status(t, 6, ResponseStatus::kSuccess)};
}

Step parse_recover(const std::vector<std::string>& t) {
  if (t.size() < 6) throw Bad("recover needs <path> time|version <x> expect ...");
  RecoverStep r;
  r.path = t[1];
  if (t[2] == "time") {
    r.target = TimeTarget{to_time(t[3])};
  } else if (t[2] == "version") {
    r.target = VersionTarget{static_cast<std::uint32_t>(to_u64(t[3]))};
  } else {
    throw Bad("recover target must be 'time' or 'version'");
  }
  std::size_t i = 4;
  for (; i < t.size() && t[i] != "expect"; ++i) {
    if (t[i] == "scan") {
      r.scan = true;
    } else if (t[i] == "apply") {
      r.apply = true;
    } else {
      throw Bad("unknown recover option '" + t[i] + "'");
    }
  }
  if (i + 1 >= t.size()) throw Bad("recover needs 'expect ok|ok-not|fail|unknown'");
  const auto& what = t[i + 1];
  const std::size_t rest = t.size() - (i + 2);
  if (what == "ok" && rest <= 1) {
    r.expect = RecoverExpect::kOk;
    if (rest == 1) r.pattern = t[i + 2];
  } else if (what == "ok-not" && rest == 1) {
    r.expect = RecoverExpect::kOkNot;
    r.pattern = t[i + 2];
  } else if (what == "fail" && rest == 0) {
    r.expect = RecoverExpect::kFail;
  } else if (what == "unknown" && rest == 0) {
    r.expect = RecoverExpect::kUnknown;
  } else {
    throw Bad("bad recover expectation");
  }
  if (r.apply && r.expect != RecoverExpect::kOk &&
      r.expect != RecoverExpect::kOkNot) {
    throw Bad("'apply' only makes sense with an ok expectation");
  }
  return r;
}

Step parse_step(const std::vector<std::string>& t, std::string_view text) {
  const auto& verb = t[0];
  if (verb.starts_with("clock+") && t.size() == 1) {
    return ClockStep{false, to_duration(verb.substr(6))};
  }
  if (verb.starts_with("clock@") && t.size() == 1) {
    return ClockStep{true, to_time(verb.substr(6))};
  }
  if (verb == "geometry") {
    need(t, 2, 2);
    try {
      return GeometryStep{parse_geometry(t[1])};
    } catch (const std::exception& e) {
      throw Bad(e.what());
    }
  }
  if (verb == "mode") {
    if (t.size() == 2 && t[1] == "selective") return ModeStep{};
    if (t.size() == 3 && t[1] == "almanac") return ModeStep{to_duration(t[2])};
    throw Bad("mode must be 'almanac <rt>' or 'selective'");
  }
  if (verb == "policy") return parse_policy(t);
  if (verb == "write") {
    need(t, 5, 5);
    return WriteStep{t[1], to_u64(t[2]), to_u64(t[3]), t[4]};
  }
  if (verb == "read") {
    need(t, 6, 6);
    if (t[4] != "expect" && t[4] != "expect-not") {
      throw Bad("read needs 'expect' or 'expect-not'");
    }
    return ReadStep{t[1], to_u64(t[2]), to_u64(t[3]), t[4] == "expect-not",
                    t[5]};
  }
  if (verb == "attack") {
    need(t, 3, 3);
    static const std::set<std::string, std::less<>> kFlags{
        "drop_pbset", "tamper_payload", "tamper_lba",
        "tamper_policy_envelope"};
    if (!kFlags.contains(t[1])) throw Bad("unknown attack flag '" + t[1] + "'");
    if (t[2] != "on" && t[2] != "off") throw Bad("attack state must be on|off");
    return AttackStep{t[1], t[2] == "on"};
  }
  if (verb == "corrupt-fs") {
    need(t, 1, 1);
    return CorruptStep{};
  }
  if (verb == "forge-policy") {
    need(t, 6, 6);
    if (t[1] != "delete") throw Bad("only 'forge-policy delete' is supported");
    if (t[3] != "random-key" && t[3] != "tamper" && t[3] != "replay") {
      throw Bad("forge method must be random-key, tamper or replay");
    }
    return ForgeStep{t[2], t[3], trailing_status(t, 4, ResponseStatus{})};
  }
  if (verb == "device") {
    if (t.size() < 2) throw Bad("device needs a request line");
    auto rest = text.substr(text.find("device") + 6);
    while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) {
      rest.remove_prefix(1);
    }
    try {
      return DeviceStep{decode_request(rest)};
    } catch (const Error& e) {
      throw Bad(e.what());
    }
  }
  if (verb == "gc") {
    need(t, 1, 1);
    return GcStep{};
  }
  if (verb == "recover") return parse_recover(t);
  if (verb == "assert-ov-count") {
    if (t.size() < 2) throw Bad("assert-ov-count needs a count");
    return AssertOvStep{to_u64(t[1]), {t.begin() + 2, t.end()}};
  }
  if (verb == "assert-policy") {
    need(t, 3, 3);
    if (t[2] != "present" && t[2] != "absent") {
      throw Bad("assert-policy takes present|absent");
    }
    return AssertPolicyStep{t[1], t[2] == "present"};
  }
  throw Bad("unknown step '" + verb + "'");
}

std::vector<Line> parse_lines(std::string_view script) {
  std::vector<Line> out;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start < script.size()) {
    auto end = script.find('\n', start);
    if (end == std::string_view::npos) end = script.size();
    std::string_view raw = script.substr(start, end - start);
    start = end + 1;
    ++number;
    if (auto hash = raw.find('#'); hash != std::string_view::npos) {
      raw = raw.substr(0, hash);
    }
    const auto tokens = tokenize(raw);
    if (tokens.empty()) continue;
    std::string text;
    for (const auto& tok : tokens) text += (text.empty() ? "" : " ") + tok;
    try {
      auto step = parse_step(tokens, raw);
      if (std::holds_alternative<GeometryStep>(step) && !out.empty()) {
        throw Bad("geometry must be the first step");
      }
      out.push_back(Line{number, text, std::move(step)});
    } catch (const Bad& e) {
      throw Error(Errc::kScriptParseError,
                  fmt::format("line {}: {}: {}", number, e.what(), text));
    }
  }
  return out;
}

Bytes fill(std::uint64_t length, std::string_view pattern) {
  Bytes out(length);
  for (std::uint64_t i = 0; i < length; ++i) {
    out[i] = static_cast<std::uint8_t>(pattern[i % pattern.size()]);
  }
  return out;
}

std::string preview(const Bytes& data) {
  std::string s;
  for (std::size_t i = 0; i < data.size() && i < 16; ++i) {
    const auto c = data[i];
    s += (c >= 0x20 && c < 0x7F) ? static_cast<char>(c) : '.';
  }
  if (data.size() > 16) s += "...";
  return s;
}

std::string status_token(ResponseStatus s) {
  switch (s) {
    case ResponseStatus::kSuccess: return "success";
    case ResponseStatus::kDuplicatePolicy: return "duplicate-policy";
    case ResponseStatus::kPolicyNotFound: return "policy-not-found";
    case ResponseStatus::kMalformed: return "malformed";
    case ResponseStatus::kMacVerificationFailed: return "mac-failure";
    case ResponseStatus::kReplayed: return "replayed";
  }
  return "?";
}

class Runner {
 public:
  explicit Runner(FlashGeometry geometry)
      : session_(std::make_unique<Session>(geometry)) {}

  // Returns the detail text; throws Failure for a failed expectation.
  std::string run(const Step& step) {
    return std::visit([this](const auto& s) { return exec(s); }, step);
  }

  struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

 private:
  Device& dev() { return session_->device; }
  HostFs& fs() { return session_->fs; }

  std::string exec(const GeometryStep& s) {
    return fmt::format("{} blocks x {} pages x {} bytes", s.geometry.blocks,
                       s.geometry.pages_per_block, s.geometry.page_size);
  }

  std::string exec(const ClockStep& s) {
    dev().advance_to(s.absolute ? s.value : dev().now() + s.value);
    return "now " + std::to_string(dev().now());
  }

  std::string exec(const ModeStep& s) {
    dev().set_almanac(s.almanac_rt);
    return s.almanac_rt ? "almanac rt=" + format_duration(*s.almanac_rt)
                        : "selective";
  }

  std::string exec(const PolicyStep& s) {
    const auto msg = session_->policy(s.cmd);
    if (msg.status != s.expect) {
      throw Failure("device answered " + status_token(msg.status) +
                    ", expected " + status_token(s.expect));
    }
    return status_token(msg.status);
  }

  std::string exec(const WriteStep& s) {
    fs().write(s.path, s.offset, fill(s.length, s.pattern));
    return fmt::format("{} bytes", s.length);
  }

  std::string exec(const ReadStep& s) {
    const auto got = fs().read(s.path, s.offset, s.length);
    const bool same = got == fill(s.length, s.pattern);
    if (same == s.negate) {
      throw Failure("read '" + preview(got) + "'");
    }
    return "read '" + preview(got) + "'";
  }

  std::string exec(const AttackStep& s) {
    auto& cfg = fs().interpose();
    if (s.flag == "drop_pbset") cfg.drop_pbset = s.on;
    if (s.flag == "tamper_payload") cfg.tamper_payload = s.on;
    if (s.flag == "tamper_lba") cfg.tamper_lba = s.on;
    if (s.flag == "tamper_policy_envelope") cfg.tamper_policy_envelope = s.on;
    return s.flag + (s.on ? " on" : " off");
  }

  std::string exec(const CorruptStep&) {
    fs().corrupt();
    return "file system metadata destroyed";
  }

  std::string exec(const ForgeStep& s) {
    SecureEnvelope env;
    if (s.method == "random-key") {
      // Malware guesses a key and a sequence number far in the future.
      env = seal(encode_command(PolicyCommand::remove(s.path)),
                 DeviceKey::random(), 1ULL << 40);
    } else {
      const auto& last = fs().last_policy_envelope();
      if (!last) throw Failure("no genuine envelope has been sent yet");
      env = *last;
      if (s.method == "tamper") {
        // Rewrite the command kind in place, as a stream cipher allows.
        env.ciphertext.at(1) ^= static_cast<std::uint8_t>(
            static_cast<std::uint8_t>(CommandKind::kCreate) ^
            static_cast<std::uint8_t>(CommandKind::kDelete));
        env.seq += 1000;
      }
    }
    dev().policy(env);
    const auto status = dev().last_policy_status();
    if (status != s.expect) {
      throw Failure("device answered " + status_token(status) +
                    ", expected " + status_token(s.expect));
    }
    return status_token(status);
  }

  std::string exec(const DeviceStep& s) {
    const auto response = dev().submit(s.request);
    struct Describe {
      const Device& dev;
      std::string operator()(const Ppa& p) const {
        return fmt::format("programmed ({},{})", p.block, p.page);
      }
      std::string operator()(const Bytes& b) const {
        return "data " + to_hex(b);
      }
      std::string operator()(const SecureEnvelope&) const {
        return "sealed response, status " +
               status_token(dev.last_policy_status());
      }
      std::string operator()(const RecoveredImage& img) const {
        return fmt::format("{} chunks, {} bytes", img.chunks.size(),
                           img.contents().size());
      }
      std::string operator()(const GcReport& r) const {
        return fmt::format("victim {}", r.victim_block);
      }
      std::string operator()(const DeviceStats& st) const {
        return format_stats(st);
      }
    };
    return std::visit(Describe{dev()}, response);
  }

  std::string exec(const GcStep&) {
    const auto r = dev().gc();
    return fmt::format(
        "victim {}: {} valid and {} OV relocated, {} invalid and {} expired "
        "reclaimed",
        r.victim_block, r.relocated_valid, r.relocated_ov,
        r.reclaimed_invalid, r.reclaimed_expired);
  }

  std::string exec(const RecoverStep& s) {
    auto req = make_recovery_request(fs(), s.path, s.target, !s.scan);
    const bool scanned = !req.lba_list.has_value();
    const std::string how = scanned ? " (exhaustive scan)" : "";
    RecoveredImage image;
    try {
      image = dev().recover(req);
    } catch (const Error& e) {
      const bool unknown = e.code() == Errc::kFileUnknown;
      const bool failed = e.code() == Errc::kRecoveryNotPossible;
      if ((s.expect == RecoverExpect::kFail && failed) ||
          (s.expect == RecoverExpect::kUnknown && unknown)) {
        return std::string(e.what()) + how;
      }
      if (!failed && !unknown) throw;
      throw Failure(std::string(e.what()) + how);
    }
    const auto contents = image.contents();
    const std::string got = "recovered '" + preview(contents) + "'" + how;
    if (s.expect == RecoverExpect::kFail ||
        s.expect == RecoverExpect::kUnknown) {
      throw Failure(got + ", expected failure");
    }
    if (s.pattern) {
      const bool same = contents == fill(contents.size(), *s.pattern);
      if (same != (s.expect == RecoverExpect::kOk)) throw Failure(got);
    }
    if (s.apply) apply_recovery(fs(), image);
    return got + (s.apply ? ", applied" : "");
  }

  std::string exec(const AssertOvStep& s) {
    const auto& ftl = dev().ftl();
    std::size_t n = 0;
    if (s.paths.empty()) {
      n = ftl.ov_pages_resident();
    } else {
      const std::set<std::string> wanted(s.paths.begin(), s.paths.end());
      const auto& g = ftl.geometry();
      for (std::size_t i = 0; i < g.total_pages(); ++i) {
        const auto ppa = g.ppa_at(i);
        if (ftl.shadow(ppa).role != PageRole::kSuperseded || !ftl.vvb(ppa)) {
          continue;
        }
        const auto& oob = ftl.flash().read_oob(ppa);
        if (oob.pbset && wanted.contains(oob.pbset->path)) ++n;
      }
    }
    if (n != s.count) {
      throw Failure(fmt::format("{} resident old versions, expected {}", n,
                                s.count));
    }
    return fmt::format("{} resident old versions", n);
  }

  std::string exec(const AssertPolicyStep& s) {
    const bool present = dev().ftl().policies().lookup(s.path) != nullptr;
    if (present != s.present) {
      throw Failure(present ? "policy present" : "policy absent");
    }
    return present ? "present" : "absent";
  }

  std::unique_ptr<Session> session_;
};

constexpr std::string_view kFig2b = R"(# Delayed attack against a device with selective versioning.
# secure.txt is kept for 5 days, temp.txt has no policy.
clock@day0
policy create /docs/secure.txt 5d 0 0
write /docs/secure.txt 0 64 V1
write /tmp/temp.txt 0 64 v1
clock@day1
write /docs/secure.txt 0 64 V2
write /tmp/temp.txt 0 64 v2
clock@day3
# malware encrypts both files
write /docs/secure.txt 0 64 ENC
write /tmp/temp.txt 0 64 enc
clock@day7
# detected
recover /docs/secure.txt time day2 expect ok V2
recover /tmp/temp.txt time day2 expect fail
assert-ov-count 2 /docs/secure.txt /tmp/temp.txt
recover /docs/secure.txt time day2 apply expect ok V2
read /docs/secure.txt 0 64 expect V2
)";

constexpr std::string_view kFig2a = R"(# The same timeline when every block shares one 3 day retention time.
mode almanac 3d
clock@day0
policy create /docs/secure.txt 5d 0 0
write /docs/secure.txt 0 64 V1
write /tmp/temp.txt 0 64 v1
clock@day1
write /docs/secure.txt 0 64 V2
write /tmp/temp.txt 0 64 v2
clock@day3
write /docs/secure.txt 0 64 ENC
write /tmp/temp.txt 0 64 enc
clock@day7
recover /docs/secure.txt time day2 expect fail
recover /tmp/temp.txt time day2 expect fail
assert-ov-count 4 /docs/secure.txt /tmp/temp.txt
)";

constexpr std::string_view kAttack1 = R"(# File attack: ransomware overwrites a protected file.
clock@day0
policy create /home/u/thesis.tex 7d 0 0
write /home/u/thesis.tex 0 192 draft1
clock@day1
write /home/u/thesis.tex 0 192 draft2
write /home/u/notes.txt 0 64 notes
clock@day2
write /home/u/thesis.tex 0 192 LOCKED
write /home/u/notes.txt 0 64 LOCKED
gc
clock@day4
recover /home/u/thesis.tex version 1 expect ok draft2
recover /home/u/thesis.tex time day1 apply expect ok draft2
read /home/u/thesis.tex 0 192 expect draft2
recover /home/u/notes.txt time day1 expect fail
)";

constexpr std::string_view kAttack2 = R"(# Policy deletion attack: malware tries to drop the policy.
clock@day0
policy create /srv/db/main.db 10d 0 0
write /srv/db/main.db 0 128 good
forge-policy delete /srv/db/main.db random-key expect mac-failure
forge-policy delete /srv/db/main.db tamper expect mac-failure
forge-policy delete /srv/db/main.db replay expect replayed
attack tamper_policy_envelope on
policy delete /srv/db/main.db expect mac-failure
attack tamper_policy_envelope off
assert-policy /srv/db/main.db present
clock@day1
write /srv/db/main.db 0 128 wiped
clock@day3
recover /srv/db/main.db time day0 expect ok good
)";

constexpr std::string_view kAttack3 = R"(# Version attack: a flood of overwrites wears out capped versions.
clock@day0
policy create /data/capped.db 30d 0 2
policy create /data/unlimited.db 30d 0 0
write /data/capped.db 0 64 good
write /data/unlimited.db 0 64 good
clock@day1
write /data/capped.db 0 64 junk1
write /data/unlimited.db 0 64 junk1
clock+1m
write /data/capped.db 0 64 junk2
write /data/unlimited.db 0 64 junk2
clock+1m
write /data/capped.db 0 64 junk3
write /data/unlimited.db 0 64 junk3
clock+1m
write /data/capped.db 0 64 junk4
write /data/unlimited.db 0 64 junk4
gc
clock@day2
recover /data/capped.db time day0 expect fail
recover /data/unlimited.db time day0 expect ok good
recover /data/capped.db version 2 expect ok junk2
)";

constexpr std::string_view kAttack4 = R"(# File system corruption: recovery without an LBA list.
clock@day0
policy create /var/mail/inbox 7d 0 0
write /var/mail/inbox 0 256 mail
write /var/mail/sent 0 64 sent
clock@day1
write /var/mail/inbox 0 256 GONE
corrupt-fs
clock@day2
recover /var/mail/inbox time day0 expect ok mail
recover /var/mail/inbox time day0 scan expect ok mail
recover /var/mail/inbox version 0 expect ok GONE
recover /var/mail/missing time day2 expect unknown
)";

constexpr std::string_view kAttack5 = R"(# Man in the middle: payload and LBA tampering after the intrusion.
clock@day0
policy create /docs/ledger.csv 7d 0 0
write /docs/ledger.csv 0 128 clean
write /docs/other.txt 0 64 other
clock@day1
attack tamper_payload on
write /docs/ledger.csv 0 128 update
attack tamper_payload off
read /docs/ledger.csv 0 128 expect-not update
attack tamper_lba on
write /docs/ledger.csv 0 128 update2
attack tamper_lba off
read /docs/other.txt 0 64 expect-not other
clock@day2
recover /docs/ledger.csv time day0 expect ok clean
recover /docs/ledger.csv time day1 expect ok-not update
)";

constexpr std::string_view kAttack6 = R"(# Man in the middle: piggyback sets stripped after the intrusion.
clock@day0
policy create /home/u/keys.pem 7d 0 0
write /home/u/keys.pem 0 128 secret
clock@day1
attack drop_pbset on
write /home/u/keys.pem 0 128 XXXX
attack drop_pbset off
read /home/u/keys.pem 0 128 expect XXXX
clock@day3
recover /home/u/keys.pem time day0 expect ok secret
recover /home/u/keys.pem time day2 expect ok secret
)";

const std::map<std::string, std::string_view, std::less<>>& builtins() {
  static const std::map<std::string, std::string_view, std::less<>> kAll{
      {"fig2a", kFig2a},     {"fig2b", kFig2b},     {"attack1", kAttack1},
      {"attack2", kAttack2}, {"attack3", kAttack3}, {"attack4", kAttack4},
      {"attack5", kAttack5}, {"attack6", kAttack6},
  };
  return kAll;
}

}  // namespace

std::size_t ScenarioReport::failures() const {
  std::size_t n = 0;
  for (const auto& s : steps) n += s.ok ? 0 : 1;
  return n;
}

std::string ScenarioReport::render() const {
  std::string out;
  for (const auto& s : steps) {
    out += fmt::format("{:>4}  {:<4}  {}", s.line, s.ok ? "ok" : "FAIL",
                       s.text);
    if (!s.detail.empty()) out += "  -> " + s.detail;
    out += '\n';
  }
  out += fmt::format("{}: {} steps, {} failed\n", name, steps.size(),
                     failures());
  return out;
}

void parse_scenario(std::string_view script) { parse_lines(script); }

ScenarioReport run_scenario(std::string_view script, std::string name) {
  const auto lines = parse_lines(script);
  FlashGeometry geometry = kScenarioGeometry;
  if (!lines.empty()) {
    if (const auto* g = std::get_if<GeometryStep>(&lines.front().step)) {
      geometry = g->geometry;
    }
  }
  Runner runner(geometry);
  ScenarioReport report;
  report.name = std::move(name);
  for (const auto& line : lines) {
    StepResult r{line.number, line.text, true, {}};
    try {
      r.detail = runner.run(line.step);
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = e.what();
    }
    report.steps.push_back(std::move(r));
  }
  return report;
}

std::optional<std::string_view> builtin_scenario(std::string_view name) {
  auto it = builtins().find(name);
  if (it == builtins().end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> out;
  for (const auto& [name, script] : builtins()) out.push_back(name);
  return out;
}

}  // namespace vssd
