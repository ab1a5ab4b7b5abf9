#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "vssd/host_fs.hpp"

namespace vssd {

/// Device image container:
///
///     magic "VSSDIMG\0" (8 bytes) | format version u32 little-endian | body
///
/// The body is a cereal portable-binary archive of the flash geometry, the
/// device (FTL, timer, verifier counters), the host file system and the
/// policy manager's sequence counters. Keys are never stored.
inline constexpr char kImageMagic[8] = {'V', 'S', 'S', 'D', 'I', 'M', 'G', '\0'};
inline constexpr std::uint32_t kImageVersion = 1;

std::string encode_image(const Session& session);
/// Throws Errc::kImageFormat.
std::unique_ptr<Session> decode_image(const std::string& bytes);

/// Throws Errc::kIo.
void save_image(const std::filesystem::path& path, const Session& session);
/// Throws Errc::kIo or Errc::kImageFormat.
std::unique_ptr<Session> load_image(const std::filesystem::path& path);

}  // namespace vssd
