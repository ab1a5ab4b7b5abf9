#include <gtest/gtest.h>

#include "vssd/device.hpp"
#include "vssd/error.hpp"

namespace vssd {
namespace {

TEST(Wire, RequestsRoundTrip) {
  const auto env = seal(Bytes{1, 2, 3}, DeviceKey::vendor(), 4);
  const std::vector<Request> all{
      WriteRequest{7, Bytes{0xde, 0xad}, PiggybackSet{"/a b", 64}},
      WriteRequest{8, Bytes{1}, std::nullopt},
      ReadRequest{9},
      PolicyRequest{env},
      RecoverRequest{RecoveryRequest{"/f", TimeTarget{86400}, std::nullopt}},
      RecoverRequest{RecoveryRequest{
          "/f", VersionTarget{2}, std::vector<Extent>{{0, 3}, {64, 9}}}},
      GcRequest{},
      StatsRequest{},
  };
  for (const auto& r : all) {
    const auto line = encode_request(r);
    EXPECT_EQ(decode_request(line), r) << line;
  }
  EXPECT_EQ(encode_request(ReadRequest{12}), "READ 12");
  EXPECT_EQ(encode_request(GcRequest{}), "GC");
}

TEST(Wire, BadLinesAreParseErrors) {
  for (std::string_view line :
       {"", "FLY 1", "READ", "READ x", "WRITE 1 zz", "RECOVER 2f66 TIME 1",
        "RECOVER 2f66 SOMETIME 1 SCAN", "POLICY 00", "GC now"}) {
    try {
      decode_request(line);
      FAIL() << line;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kScriptParseError) << line;
    }
  }
}

TEST(Wire, Hex) {
  EXPECT_EQ(to_hex(Bytes{0, 0xab, 0x10}), "00ab10");
  EXPECT_EQ(from_hex("00AB10"), (Bytes{0, 0xab, 0x10}));
  EXPECT_THROW(from_hex("abc"), std::invalid_argument);
  EXPECT_THROW(from_hex("zz"), std::invalid_argument);
}

TEST(Device, SubmitDispatches) {
  Device d(FlashGeometry{8, 4, 16, 32}, DeviceKey::vendor());
  const auto ppa = std::get<Ppa>(d.submit(WriteRequest{1, Bytes{5}, std::nullopt}));
  EXPECT_EQ(d.ftl().live(1), ppa);
  EXPECT_EQ(std::get<Bytes>(d.submit(ReadRequest{1})), Bytes{5});
  const auto st = std::get<DeviceStats>(d.submit(StatsRequest{}));
  EXPECT_EQ(st.host_pages_written, 1u);
  EXPECT_EQ(st.mapped_lbas, 1u);
  EXPECT_EQ(st.free_blocks, 7u);
}

TEST(Device, ClockOnlyMovesForward) {
  Device d(FlashGeometry{8, 4, 16, 32}, DeviceKey::vendor());
  d.advance_to(10);
  EXPECT_EQ(d.now(), 10);
  EXPECT_THROW(d.advance_to(9), std::invalid_argument);
}

TEST(Device, PolicyResponsesAreSealed) {
  const auto key = DeviceKey::random();
  Device d(FlashGeometry{8, 4, 16, 32}, key);
  SecurePolicyManager spm(key);
  const auto req = spm.seal_command(PolicyCommand::create("/a", {5, 0, 0}));
  const auto resp = spm.open_response(d.policy(req));
  EXPECT_EQ(resp.status, ResponseStatus::kSuccess);
  EXPECT_EQ(resp.request_seq, req.seq);
  // A replay is answered, not applied.
  EXPECT_EQ(spm.open_response(d.policy(req)).status, ResponseStatus::kReplayed);
  // Garbage under the right key is malformed.
  auto bogus = seal(Bytes{9, 9, 9}, key, 1000);
  EXPECT_EQ(spm.open_response(d.policy(bogus)).status, ResponseStatus::kMalformed);
  EXPECT_EQ(d.ftl().policies().size(), 1u);
}

TEST(Device, StatsFormat) {
  DeviceStats s;
  s.host_pages_written = 4;
  s.nand_pages_programmed = 6;
  const auto text = format_stats(s);
  EXPECT_NE(text.find("waf=1.5000"), std::string::npos) << text;
}

}  // namespace
}  // namespace vssd
