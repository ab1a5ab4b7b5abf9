#include "vssd/image.hpp"

#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/common.hpp>
#include <cereal/types/deque.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/unordered_map.hpp>
#include <cereal/types/vector.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

#include "vssd/error.hpp"

namespace vssd {

namespace {

constexpr std::size_t kHeaderSize = sizeof(kImageMagic) + 4;

}  // namespace

std::string encode_image(const Session& session) {
  std::ostringstream out(std::ios::binary);
  out.write(kImageMagic, sizeof(kImageMagic));
  for (int i = 0; i < 4; ++i) {
    out.put(static_cast<char>((kImageVersion >> (8 * i)) & 0xFF));
  }
  {
    cereal::PortableBinaryOutputArchive ar(out);
    ar(session.device.ftl().geometry(), session.device, session.fs,
       session.spm.next_seq(), session.spm.last_response_seq());
  }
  return std::move(out).str();
}

std::unique_ptr<Session> decode_image(const std::string& bytes) {
  if (bytes.size() < kHeaderSize ||
      std::memcmp(bytes.data(), kImageMagic, sizeof(kImageMagic)) != 0) {
    throw Error(Errc::kImageFormat, "not a device image (bad magic)");
  }
  std::uint32_t version = 0;
  for (int i = 0; i < 4; ++i) {
    version |= static_cast<std::uint32_t>(
                   static_cast<std::uint8_t>(bytes[sizeof(kImageMagic) + i]))
               << (8 * i);
  }
  if (version != kImageVersion) {
    throw Error(Errc::kImageFormat,
                "unsupported image version " + std::to_string(version));
  }
  std::istringstream in(bytes.substr(kHeaderSize), std::ios::binary);
  try {
    cereal::PortableBinaryInputArchive ar(in);
    FlashGeometry geometry;
    ar(geometry);
    geometry.validate();
    auto session = std::make_unique<Session>(geometry);
    std::uint64_t next_seq = 0;
    std::uint64_t last_response = 0;
    ar(session->device, session->fs, next_seq, last_response);
    session->spm.restore_counters(next_seq, last_response);
    return session;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(Errc::kImageFormat, std::string("corrupt image body: ") + e.what());
  }
}

void save_image(const std::filesystem::path& path, const Session& session) {
  const auto bytes = encode_image(session);
  // Write to a sibling file first so a failed save never truncates the image.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::kIo, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(Errc::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

std::unique_ptr<Session> load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open image " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_image(buf.str());
}

}  // namespace vssd
