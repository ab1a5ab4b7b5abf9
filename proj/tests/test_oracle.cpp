#include <gtest/gtest.h>

#include <random>

#include "vssd/host_fs.hpp"
#include "vssd/oracle.hpp"

namespace vssd {
namespace {

Bytes fill(char c, std::size_t n) { return Bytes(n, static_cast<std::uint8_t>(c)); }

TEST(Oracle, SimpleHistory) {
  ShadowOracle o;
  o.record_policy(0, PolicyCommand::create("/f", {10, 0, 0}));
  o.record_write(0, "/f", 0, fill('a', 4));
  o.record_write(5, "/f", 0, fill('b', 4));
  o.record_write(5, "/u", 0, fill('c', 4));
  o.record_write(6, "/u", 0, fill('d', 4));
  EXPECT_EQ(o.expected("/f", TimeTarget{1}, 15), ProbeAnswer{ProbeContents{fill('a', 4)}});
  EXPECT_EQ(o.expected("/f", TimeTarget{1}, 16),
            ProbeAnswer{ProbeUnrecoverable{{0}}});
  EXPECT_EQ(o.expected("/f", VersionTarget{1}, 15),
            ProbeAnswer{ProbeContents{fill('a', 4)}});
  EXPECT_EQ(o.expected("/u", TimeTarget{5}, 7),
            ProbeAnswer{ProbeUnrecoverable{{0}}});
  EXPECT_EQ(o.expected("/u", TimeTarget{6}, 7), ProbeAnswer{ProbeContents{fill('d', 4)}});
  EXPECT_EQ(o.expected("/x", TimeTarget{6}, 7), ProbeAnswer{ProbeNoSuchFile{}});
  EXPECT_EQ(o.expected("/u", TimeTarget{4}, 7), ProbeAnswer{ProbeNoSuchFile{}});
  EXPECT_EQ(o.events(), 5u);
}

TEST(Oracle, PredictsPolicyStatuses) {
  ShadowOracle o;
  EXPECT_EQ(o.predict(PolicyCommand::remove("/f")), ResponseStatus::kPolicyNotFound);
  EXPECT_EQ(o.predict(PolicyCommand::create("/f", {1, 0, 0})), ResponseStatus::kSuccess);
  o.record_policy(0, PolicyCommand::create("/f", {1, 0, 0}));
  EXPECT_EQ(o.predict(PolicyCommand::create("/f", {1, 0, 0})),
            ResponseStatus::kDuplicatePolicy);
  EXPECT_EQ(o.predict(PolicyCommand::change("/f", {2, 0, 0})), ResponseStatus::kSuccess);
}

void expect_clean(const RandomRunReport& r) {
  EXPECT_EQ(r.probe_mismatches, 0u);
  EXPECT_EQ(r.policy_mismatches, 0u);
  EXPECT_EQ(r.gc_violations, 0u);
  EXPECT_EQ(r.ov_losses, 0u);
  EXPECT_EQ(r.scan_mismatches, 0u);
  for (const auto& n : r.notes) ADD_FAILURE() << n;
}

TEST(OracleProperty, RandomRunsAgreeAcrossSeeds) {
  for (std::uint64_t seed : {2u, 3u, 4u, 5u, 6u}) {
    RandomRunConfig cfg;
    cfg.seed = seed;
    cfg.ops = 2500;
    cfg.probes = 80;
    cfg.checkpoints = 10;
    const auto r = run_random(cfg);
    SCOPED_TRACE(seed);
    expect_clean(r);
    EXPECT_EQ(r.probes, 80u);
    EXPECT_GT(r.gc_passes, 0u);
    EXPECT_GT(r.probes_recovered, 0u);
    EXPECT_GT(r.probes_unrecoverable, 0u);
  }
}

TEST(OracleProperty, TightGeometryStillAgrees) {
  RandomRunConfig cfg;
  cfg.seed = 9;
  cfg.ops = 3000;
  cfg.probes = 60;
  cfg.checkpoints = 10;
  cfg.geometry = FlashGeometry{12, 16, 64, 256};
  const auto r = run_random(cfg);
  expect_clean(r);
  EXPECT_GT(r.gc_passes, 0u);
}

// Almanac(rt) behaves exactly like a (rt, 0, 0) policy on every file.
TEST(AlmanacProperty, SubsumedBySelectivePoliciesOnEveryFile) {
  const FlashGeometry g{16, 16, 32, 64};
  const Duration rt = 2 * kDay;
  Session almanac(g);
  Session selective(g);
  almanac.device.set_almanac(rt);
  const std::vector<std::string> files{"/a", "/b", "/c", "/d", "/e"};
  for (const auto& f : files) {
    ASSERT_EQ(selective.policy(PolicyCommand::create(f, {rt, 0, 0})).status,
              ResponseStatus::kSuccess);
  }
  std::mt19937_64 rng(4);
  Timestamp now = 0;
  for (int i = 0; i < 3000; ++i) {
    if (rng() % 8 == 0) {
      now += static_cast<Timestamp>(rng() % (12 * kHour));
      almanac.device.advance_to(now);
      selective.device.advance_to(now);
    }
    const auto& f = files[rng() % files.size()];
    const auto data = fill(static_cast<char>(rng()), 32 * (1 + rng() % 2));
    const auto offset = 32 * (rng() % 3);
    bool full_a = false;
    bool full_s = false;
    try {
      almanac.fs.write(f, offset, data);
    } catch (const Error&) {
      full_a = true;
    }
    try {
      selective.fs.write(f, offset, data);
    } catch (const Error&) {
      full_s = true;
    }
    ASSERT_EQ(full_a, full_s);
    if (i % 100 == 0) {
      ASSERT_EQ(almanac.device.stats().nand_pages_programmed,
                selective.device.stats().nand_pages_programmed);
      ASSERT_EQ(almanac.device.stats().ov_pages_resident,
                selective.device.stats().ov_pages_resident);
      for (const auto& path : files) {
        for (Timestamp back : {Timestamp{0}, kHour, kDay, 3 * kDay}) {
          const RecoveryTarget t = TimeTarget{std::max<Timestamp>(0, now - back)};
          const auto a = probe_device(
              almanac.device.ftl(),
              make_recovery_request(almanac.fs, path, t, true), now);
          const auto b = probe_device(
              selective.device.ftl(),
              make_recovery_request(selective.fs, path, t, true), now);
          ASSERT_TRUE(a == b) << path << " " << describe(t) << ": "
                              << describe(a) << " vs " << describe(b);
        }
      }
    }
  }
  EXPECT_GT(almanac.device.stats().gc_invocations, 0u);
}

}  // namespace
}  // namespace vssd
