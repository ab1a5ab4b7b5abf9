#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vssd/device.hpp"
#include "vssd/secure_channel.hpp"
#include "vssd/types.hpp"

namespace vssd {

/// Man-in-the-middle switches for a compromised host. All false in benign runs.
struct InterposeConfig {
  /// Block writes reach the device without a piggyback set.
  bool drop_pbset = false;
  /// Every payload byte is inverted on its way to the device.
  bool tamper_payload = false;
  /// Block writes land on the next allocated LBA (wrapping) instead.
  bool tamper_lba = false;
  /// One ciphertext bit of each policy envelope is flipped in transit.
  bool tamper_policy_envelope = false;

  friend bool operator==(const InterposeConfig&,
                         const InterposeConfig&) = default;

  template <class Archive>
  void serialize(Archive& ar) {
    ar(drop_pbset, tamper_payload, tamper_lba, tamper_policy_envelope);
  }
};

/// Minimal host file system: a flat path -> extent map over the device, with
/// one LBA per page-sized block allocated from a monotone counter. Every block
/// write carries the (path, offset) piggyback set.
class HostFs {
 public:
  explicit HostFs(Device& device) : device_(&device) {}

  /// Page-aligned write. Throws kMisaligned, kFsCorrupted or device errors.
  void write(const std::string& path, std::uint64_t offset,
             std::span<const std::uint8_t> data);
  /// Throws kFileNotFound, kHoleRead, kMisaligned, kFsCorrupted.
  Bytes read(const std::string& path, std::uint64_t offset,
             std::uint64_t length) const;
  /// Whole file (every block in offset order).
  Bytes read_all(const std::string& path) const;

  /// The ioctl analog: offset-sorted extents, empty for an unknown path.
  /// Throws kFsCorrupted once the file system metadata has been destroyed.
  std::vector<Extent> lba_list(const std::string& path) const;
  bool exists(const std::string& path) const;
  std::vector<std::string> paths() const;

  /// Seals `cmd`, sends it (through the interposer) and opens the response.
  ResponseMessage submit_policy(SecurePolicyManager& spm,
                                const PolicyCommand& cmd);

  /// The envelope most recently sent by submit_policy (as it left the
  /// interposer). Visible to host malware, so scenarios can replay it.
  const std::optional<SecureEnvelope>& last_policy_envelope() const {
    return last_envelope_;
  }

  /// Simulates malware destroying the file system metadata.
  void corrupt() { corrupted_ = true; }
  bool corrupted() const { return corrupted_; }

  InterposeConfig& interpose() { return interpose_; }
  const InterposeConfig& interpose() const { return interpose_; }

  Device& device() { return *device_; }
  const Device& device() const { return *device_; }
  void rebind(Device& device) { device_ = &device; }

  template <class Archive>
  void serialize(Archive& ar) {
    ar(files_, next_lba_, corrupted_, interpose_);
  }

 private:
  std::uint32_t page_size() const {
    return device_->ftl().geometry().page_size;
  }
  void check_intact() const;
  Lba redirect(Lba lba) const;

  Device* device_;
  std::map<std::string, std::map<std::uint64_t, Lba>> files_;
  Lba next_lba_ = 0;
  bool corrupted_ = false;
  InterposeConfig interpose_;
  std::optional<SecureEnvelope> last_envelope_;
};

/// A device together with the host stack that drives it.
class Session {
 public:
  explicit Session(FlashGeometry geometry,
                   DeviceKey key = DeviceKey::vendor())
      : device(geometry, key), fs(device), spm(key) {}
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  ResponseMessage policy(const PolicyCommand& cmd) {
    return fs.submit_policy(spm, cmd);
  }

  Device device;
  HostFs fs;
  SecurePolicyManager spm;
};

}  // namespace vssd
