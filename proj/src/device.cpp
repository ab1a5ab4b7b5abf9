#include "vssd/device.hpp"

#include <fmt/format.h>

#include <charconv>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace vssd {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    auto end = line.find(sep, start);
    if (end == std::string_view::npos) end = line.size();
    out.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("bad integer '" + std::string(text) + "'");
  }
  return v;
}

std::string path_from_hex(std::string_view hex) {
  auto bytes = from_hex(hex);
  if (bytes.empty()) throw std::invalid_argument("empty path");
  return std::string(bytes.begin(), bytes.end());
}

std::string path_to_hex(const std::string& path) {
  return to_hex({reinterpret_cast<const std::uint8_t*>(path.data()),
                 path.size()});
}

Request decode_fields(const std::vector<std::string_view>& f) {
  const auto verb = f.at(0);
  if (verb == "WRITE" && (f.size() == 3 || f.size() == 5)) {
    WriteRequest w{parse_u64(f[1]), from_hex(f[2]), std::nullopt};
    if (f.size() == 5) w.pbset = PiggybackSet{path_from_hex(f[3]), parse_u64(f[4])};
    return w;
  }
  if (verb == "READ" && f.size() == 2) return ReadRequest{parse_u64(f[1])};
  if (verb == "POLICY" && f.size() == 2) {
    return PolicyRequest{SecureEnvelope::parse(from_hex(f[1]))};
  }
  if (verb == "RECOVER" && (f.size() == 5 || f.size() == 6)) {
    RecoveryRequest r;
    r.path = path_from_hex(f[1]);
    if (f[2] == "TIME") {
      r.target = TimeTarget{static_cast<Timestamp>(parse_u64(f[3]))};
    } else if (f[2] == "VERSION") {
      r.target = VersionTarget{static_cast<std::uint32_t>(parse_u64(f[3]))};
    } else {
      throw std::invalid_argument("target must be TIME or VERSION");
    }
    if (f[4] == "SCAN" && f.size() == 5) return RecoverRequest{r};
    if (f[4] != "LBAS") throw std::invalid_argument("expected SCAN or LBAS");
    std::vector<Extent> list;
    if (f.size() == 6) {
      for (auto item : split(f[5], ',')) {
        auto colon = item.find(':');
        if (colon == std::string_view::npos) {
          throw std::invalid_argument("extent needs offset:lba");
        }
        list.push_back(Extent{parse_u64(item.substr(0, colon)),
                              parse_u64(item.substr(colon + 1))});
      }
    }
    r.lba_list = std::move(list);
    return RecoverRequest{r};
  }
  if (verb == "GC" && f.size() == 1) return GcRequest{};
  if (verb == "STATS" && f.size() == 1) return StatsRequest{};
  throw std::invalid_argument("unknown request or wrong field count");
}

}  // namespace

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex");
  auto nibble = [](char c) -> std::uint8_t {
    if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
    if (c >= 'A' && c <= 'F') return static_cast<std::uint8_t>(c - 'A' + 10);
    throw std::invalid_argument("bad hex digit");
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

std::string encode_request(const Request& request) {
  struct Encoder {
    std::string operator()(const WriteRequest& w) const {
      auto line = fmt::format("WRITE {} {}", w.lba, to_hex(w.payload));
      if (w.pbset) {
        line += fmt::format(" {} {}", path_to_hex(w.pbset->path),
                            w.pbset->offset);
      }
      return line;
    }
    std::string operator()(const ReadRequest& r) const {
      return fmt::format("READ {}", r.lba);
    }
    std::string operator()(const PolicyRequest& p) const {
      return "POLICY " + to_hex(p.envelope.serialize());
    }
    std::string operator()(const RecoverRequest& rr) const {
      const auto& r = rr.request;
      std::string line = "RECOVER " + path_to_hex(r.path);
      if (const auto* t = std::get_if<TimeTarget>(&r.target)) {
        line += fmt::format(" TIME {}", t->time);
      } else {
        line += fmt::format(" VERSION {}",
                            std::get<VersionTarget>(r.target).ordinal);
      }
      if (!r.lba_list) return line + " SCAN";
      line += " LBAS";
      for (std::size_t i = 0; i < r.lba_list->size(); ++i) {
        line += fmt::format("{}{}:{}", i == 0 ? " " : ",",
                            (*r.lba_list)[i].offset, (*r.lba_list)[i].lba);
      }
      return line;
    }
    std::string operator()(const GcRequest&) const { return "GC"; }
    std::string operator()(const StatsRequest&) const { return "STATS"; }
  };
  return std::visit(Encoder{}, request);
}

Request decode_request(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  try {
    return decode_fields(split(line, ' '));
  } catch (const Error&) {
    throw Error(Errc::kScriptParseError,
                "malformed envelope in '" + std::string(line) + "'");
  } catch (const std::exception& e) {
    throw Error(Errc::kScriptParseError,
                std::string(e.what()) + " in '" + std::string(line) + "'");
  }
}

std::string format_stats(const DeviceStats& s) {
  const double waf = s.host_pages_written == 0
                         ? 0.0
                         : static_cast<double>(s.nand_pages_programmed) /
                               static_cast<double>(s.host_pages_written);
  return fmt::format(
      "clock={} host_pages_written={} nand_pages_programmed={} waf={:.4f} "
      "gc_invocations={} relocations={} erases={} ov_pages_resident={} "
      "free_blocks={} mapped_lbas={} policies={}",
      s.clock, s.host_pages_written, s.nand_pages_programmed, waf,
      s.gc_invocations, s.relocations, s.erases, s.ov_pages_resident,
      s.free_blocks, s.mapped_lbas, s.policies);
}

Device::Device(FlashGeometry geometry, DeviceKey key)
    : ftl_(geometry), verifier_(key) {}

void Device::advance_to(Timestamp t) {
  if (t < clock_) {
    throw std::invalid_argument(
        fmt::format("device timer cannot move back from {} to {}", clock_, t));
  }
  clock_ = t;
}

Ppa Device::write(Lba lba, std::span<const std::uint8_t> payload,
                  const std::optional<PiggybackSet>& pbset) {
  return ftl_.write(lba, payload, pbset, clock_);
}

Bytes Device::read(Lba lba) const { return ftl_.read(lba); }

SecureEnvelope Device::policy(const SecureEnvelope& envelope) {
  ResponseMessage response;
  try {
    const auto cmd = verifier_.open_command(envelope);
    response.request_seq = envelope.seq;
    ftl_.apply_policy(cmd, clock_);
    response.status = ResponseStatus::kSuccess;
  } catch (const Error& e) {
    switch (e.code()) {
      case Errc::kMacVerificationFailed:
        response.status = ResponseStatus::kMacVerificationFailed;
        break;
      case Errc::kReplayedMessage:
        response.status = ResponseStatus::kReplayed;
        break;
      case Errc::kDuplicatePolicy:
        response.status = ResponseStatus::kDuplicatePolicy;
        break;
      case Errc::kPolicyNotFound:
        response.status = ResponseStatus::kPolicyNotFound;
        break;
      default:
        response.status = ResponseStatus::kMalformed;
        break;
    }
  }
  last_policy_status_ = response.status;
  return verifier_.seal_response(response);
}

RecoveredImage Device::recover(const RecoveryRequest& req) const {
  return vssd::recover(ftl_, req, clock_);
}

GcReport Device::gc() { return ftl_.garbage_collect(clock_); }

DeviceStats Device::stats() const {
  const auto& c = ftl_.counters();
  DeviceStats s;
  s.clock = clock_;
  s.host_pages_written = c.host_pages_written;
  s.nand_pages_programmed = ftl_.nand_pages_programmed();
  s.gc_invocations = c.gc_invocations;
  s.relocations = c.relocated_valid + c.relocated_ov;
  s.erases = ftl_.flash().erases();
  s.ov_pages_resident = ftl_.ov_pages_resident();
  s.free_blocks = ftl_.free_blocks();
  s.mapped_lbas = ftl_.mapped_lbas();
  s.policies = ftl_.policies().size();
  return s;
}

Response Device::submit(const Request& request) {
  struct Dispatch {
    Device& dev;
    Response operator()(const WriteRequest& w) const {
      return dev.write(w.lba, w.payload, w.pbset);
    }
    Response operator()(const ReadRequest& r) const { return dev.read(r.lba); }
    Response operator()(const PolicyRequest& p) const {
      return dev.policy(p.envelope);
    }
    Response operator()(const RecoverRequest& r) const {
      return dev.recover(r.request);
    }
    Response operator()(const GcRequest&) const { return dev.gc(); }
    Response operator()(const StatsRequest&) const { return dev.stats(); }
  };
  return std::visit(Dispatch{*this}, request);
}

void Device::set_almanac(std::optional<Duration> rt) {
  if (rt) {
    ftl_.set_uniform_policy(ConfigParams{*rt, 0, 0});
  } else {
    ftl_.set_uniform_policy(std::nullopt);
  }
}

}  // namespace vssd
