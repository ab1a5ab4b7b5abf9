#include "vssd/host_fs.hpp"

#include <algorithm>

#include "vssd/error.hpp"

namespace vssd {

void HostFs::check_intact() const {
  if (corrupted_) {
    throw Error(Errc::kFsCorrupted, "file system metadata is destroyed");
  }
}

Lba HostFs::redirect(Lba lba) const {
  // next_lba_ is never 0 here: the caller has just allocated or reused one.
  return (lba + 1) % next_lba_;
}

void HostFs::write(const std::string& path, std::uint64_t offset,
                   std::span<const std::uint8_t> data) {
  check_intact();
  const auto ps = page_size();
  if (offset % ps != 0 || data.empty() || data.size() % ps != 0) {
    throw Error(Errc::kMisaligned,
                "offset and length must be multiples of the page size " +
                    std::to_string(ps));
  }
  for (std::size_t i = 0; i < data.size(); i += ps) {
    const std::uint64_t block_offset = offset + i;
    auto& extents = files_[path];
    auto it = extents.find(block_offset);
    const bool fresh = it == extents.end();
    const Lba lba = fresh ? next_lba_ : it->second;
    if (fresh) ++next_lba_;

    Bytes chunk(data.begin() + static_cast<std::ptrdiff_t>(i),
                data.begin() + static_cast<std::ptrdiff_t>(i + ps));
    if (interpose_.tamper_payload) {
      for (auto& b : chunk) b ^= 0xFF;
    }
    std::optional<PiggybackSet> pbset;
    if (!interpose_.drop_pbset) pbset = PiggybackSet{path, block_offset};
    const Lba target = interpose_.tamper_lba ? redirect(lba) : lba;
    try {
      device_->write(target, chunk, pbset);
    } catch (...) {
      if (fresh) {
        --next_lba_;
        if (extents.empty()) files_.erase(path);
      }
      throw;
    }
    if (fresh) extents.emplace(block_offset, lba);
  }
}

Bytes HostFs::read(const std::string& path, std::uint64_t offset,
                   std::uint64_t length) const {
  check_intact();
  const auto ps = page_size();
  if (offset % ps != 0 || length % ps != 0) {
    throw Error(Errc::kMisaligned,
                "offset and length must be multiples of the page size " +
                    std::to_string(ps));
  }
  auto file = files_.find(path);
  if (file == files_.end()) throw Error(Errc::kFileNotFound, path);
  Bytes out;
  out.reserve(length);
  for (std::uint64_t o = offset; o < offset + length; o += ps) {
    auto it = file->second.find(o);
    if (it == file->second.end()) {
      throw Error(Errc::kHoleRead, path + " @" + std::to_string(o));
    }
    const auto block = device_->read(it->second);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

Bytes HostFs::read_all(const std::string& path) const {
  check_intact();
  auto file = files_.find(path);
  if (file == files_.end()) throw Error(Errc::kFileNotFound, path);
  Bytes out;
  for (const auto& [offset, lba] : file->second) {
    const auto block = device_->read(lba);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

std::vector<Extent> HostFs::lba_list(const std::string& path) const {
  check_intact();
  std::vector<Extent> out;
  auto file = files_.find(path);
  if (file == files_.end()) return out;
  for (const auto& [offset, lba] : file->second) {
    out.push_back(Extent{offset, lba});
  }
  return out;
}

bool HostFs::exists(const std::string& path) const {
  return files_.contains(path);
}

std::vector<std::string> HostFs::paths() const {
  std::vector<std::string> out;
  for (const auto& [path, extents] : files_) out.push_back(path);
  return out;
}

ResponseMessage HostFs::submit_policy(SecurePolicyManager& spm,
                                      const PolicyCommand& cmd) {
  auto envelope = spm.seal_command(cmd);
  if (interpose_.tamper_policy_envelope) envelope.ciphertext.at(0) ^= 0x01;
  last_envelope_ = envelope;
  return spm.open_response(device_->policy(envelope));
}

}  // namespace vssd
