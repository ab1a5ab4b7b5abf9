#include <gtest/gtest.h>

#include <map>
#include <random>

#include "vssd/error.hpp"
#include "vssd/host_fs.hpp"

namespace vssd {
namespace {

constexpr FlashGeometry kGeom{16, 8, 32, 64};

Bytes fill(char c, std::size_t n) { return Bytes(n, static_cast<std::uint8_t>(c)); }

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no vssd::Error thrown";
  return Errc::kIo;
}

TEST(HostFs, WriteReadAndExtents) {
  Session s(kGeom);
  s.fs.write("/f", 0, fill('a', 64));
  s.fs.write("/g", 0, fill('b', 32));
  s.fs.write("/f", 64, fill('c', 32));
  EXPECT_EQ(s.fs.read("/f", 32, 64), [] {
    auto b = fill('a', 32);
    const auto c = fill('c', 32);
    b.insert(b.end(), c.begin(), c.end());
    return b;
  }());
  const auto ext = s.fs.lba_list("/f");
  ASSERT_EQ(ext.size(), 3u);
  EXPECT_EQ(ext[0], (Extent{0, 0}));
  EXPECT_EQ(ext[1], (Extent{32, 1}));
  EXPECT_EQ(ext[2], (Extent{64, 3}));
  EXPECT_TRUE(s.fs.lba_list("/none").empty());
  EXPECT_EQ(s.fs.paths(), (std::vector<std::string>{"/f", "/g"}));
  // Every block carries its (path, offset) tag.
  const auto oob = s.device.ftl().flash().read_oob(*s.device.ftl().live(3));
  EXPECT_EQ(oob.pbset, (PiggybackSet{"/f", 64}));
}

TEST(HostFs, RejectsMisalignedAndMissing) {
  Session s(kGeom);
  EXPECT_EQ(code_of([&] { s.fs.write("/f", 1, fill('a', 32)); }), Errc::kMisaligned);
  EXPECT_EQ(code_of([&] { s.fs.write("/f", 0, fill('a', 31)); }), Errc::kMisaligned);
  EXPECT_EQ(code_of([&] { s.fs.write("/f", 0, Bytes{}); }), Errc::kMisaligned);
  EXPECT_FALSE(s.fs.exists("/f"));
  EXPECT_EQ(code_of([&] { s.fs.read("/f", 0, 32); }), Errc::kFileNotFound);
  s.fs.write("/f", 64, fill('a', 32));
  EXPECT_EQ(code_of([&] { s.fs.read("/f", 0, 32); }), Errc::kHoleRead);
  EXPECT_EQ(code_of([&] { s.fs.read("/f", 64, 3); }), Errc::kMisaligned);
}

TEST(HostFs, CorruptionHidesMetadata) {
  Session s(kGeom);
  s.fs.write("/f", 0, fill('a', 32));
  s.fs.corrupt();
  EXPECT_EQ(code_of([&] { s.fs.lba_list("/f"); }), Errc::kFsCorrupted);
  EXPECT_EQ(code_of([&] { s.fs.read_all("/f"); }), Errc::kFsCorrupted);
  EXPECT_EQ(code_of([&] { s.fs.write("/f", 0, fill('b', 32)); }),
            Errc::kFsCorrupted);
  // The device still has the data.
  EXPECT_EQ(s.device.read(0), fill('a', 32));
}

TEST(HostFs, InterposerSwitches) {
  Session s(kGeom);
  s.fs.write("/a", 0, fill('a', 32));
  s.fs.write("/b", 0, fill('b', 32));
  s.fs.interpose().tamper_payload = true;
  s.fs.write("/a", 0, fill('x', 32));
  EXPECT_EQ(s.fs.read_all("/a"), fill(static_cast<char>('x' ^ 0xFF), 32));
  s.fs.interpose() = {};
  s.fs.interpose().tamper_lba = true;
  s.fs.write("/a", 0, fill('y', 32));
  EXPECT_EQ(s.fs.read_all("/b"), fill('y', 32));
  s.fs.interpose() = {};
  s.fs.interpose().drop_pbset = true;
  s.fs.write("/a", 0, fill('z', 32));
  EXPECT_FALSE(s.device.ftl().flash().read_oob(*s.device.ftl().live(0)).pbset);
}

TEST(HostFs, PolicyCommandsTravelSealed) {
  Session s(kGeom);
  EXPECT_EQ(s.policy(PolicyCommand::create("/a", {10, 0, 0})).status,
            ResponseStatus::kSuccess);
  EXPECT_EQ(s.policy(PolicyCommand::create("/a", {10, 0, 0})).status,
            ResponseStatus::kDuplicatePolicy);
  EXPECT_EQ(s.policy(PolicyCommand::remove("/b")).status,
            ResponseStatus::kPolicyNotFound);
  s.fs.interpose().tamper_policy_envelope = true;
  EXPECT_EQ(s.policy(PolicyCommand::remove("/a")).status,
            ResponseStatus::kMacVerificationFailed);
  EXPECT_NE(s.device.ftl().policies().lookup("/a"), nullptr);
  ASSERT_TRUE(s.fs.last_policy_envelope());
  EXPECT_EQ(s.device.policy(*s.fs.last_policy_envelope()).seq != 0, true);
  EXPECT_EQ(s.device.last_policy_status(), ResponseStatus::kMacVerificationFailed);
}

// Benign transparency and extent stability over random page-aligned I/O.
TEST(HostFsProperty, BenignReadsReturnLastWrites) {
  Session s(FlashGeometry{24, 8, 16, 64});
  std::mt19937_64 rng(21);
  std::map<std::pair<std::string, std::uint64_t>, Bytes> model;
  std::map<std::pair<std::string, std::uint64_t>, Lba> first_lba;
  const std::vector<std::string> paths{"/a", "/b", "/c"};
  for (int i = 0; i < 2000; ++i) {
    const auto& path = paths[rng() % paths.size()];
    const std::uint64_t page = rng() % 6;
    const std::size_t pages = 1 + rng() % 2;
    Bytes data(pages * 16);
    for (auto& b : data) b = static_cast<std::uint8_t>(rng());
    s.fs.write(path, page * 16, data);
    for (std::size_t k = 0; k < pages; ++k) {
      model[{path, (page + k) * 16}] =
          Bytes(data.begin() + k * 16, data.begin() + (k + 1) * 16);
    }
    if (i % 97 == 0) s.device.advance_to(s.device.now() + 1);
    for (const auto& e : s.fs.lba_list(path)) {
      auto [it, fresh] = first_lba.emplace(std::pair{path, e.offset}, e.lba);
      ASSERT_EQ(it->second, e.lba);
    }
  }
  for (const auto& [key, data] : model) {
    ASSERT_EQ(s.fs.read(key.first, key.second, 16), data);
  }
}

}  // namespace
}  // namespace vssd
