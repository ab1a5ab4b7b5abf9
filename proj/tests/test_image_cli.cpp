#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "vssd/cli.hpp"
#include "vssd/error.hpp"
#include "vssd/image.hpp"

namespace vssd {
namespace {

namespace fs = std::filesystem;

Bytes fill(char c, std::size_t n) { return Bytes(n, static_cast<std::uint8_t>(c)); }

std::unique_ptr<Session> busy_session(std::uint64_t seed) {
  auto s = std::make_unique<Session>(FlashGeometry{12, 8, 32, 64});
  std::mt19937_64 rng(seed);
  s->policy(PolicyCommand::create("/p", {kDay, 0, 2}));
  for (int i = 0; i < 400; ++i) {
    if (rng() % 10 == 0) s->device.advance_to(s->device.now() + kHour);
    try {
      s->fs.write(rng() % 2 ? "/p" : "/q", 32 * (rng() % 4),
                  fill(static_cast<char>(rng()), 32));
    } catch (const Error&) {
    }
  }
  return s;
}

TEST(ImageProperty, RoundTripKeepsStatsAndBehaviour) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto s = busy_session(seed);
    const auto bytes = encode_image(*s);
    auto back = decode_image(bytes);
    EXPECT_EQ(back->device.stats(), s->device.stats());
    EXPECT_EQ(encode_image(*back), bytes);
    EXPECT_EQ(back->fs.read_all("/p"), s->fs.read_all("/p"));
    // Both copies continue identically, including the secure channel.
    for (auto* x : {s.get(), back.get()}) {
      EXPECT_EQ(x->policy(PolicyCommand::change("/p", {2 * kDay, 0, 0})).status,
                ResponseStatus::kSuccess);
      x->fs.write("/p", 0, fill('z', 32));
    }
    EXPECT_EQ(encode_image(*back), encode_image(*s));
  }
}

TEST(Image, RejectsForeignBytes) {
  auto s = busy_session(4);
  auto bytes = encode_image(*s);
  for (auto bad : {std::string("nope"), std::string(bytes).replace(0, 1, "X"),
                   std::string(bytes).replace(8, 1, "\x02"),
                   bytes.substr(0, bytes.size() / 2)}) {
    try {
      decode_image(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kImageFormat);
    }
  }
}

TEST(ExitCodes, StableTable) {
  const std::vector<std::pair<Errc, int>> table{
      {Errc::kDuplicatePolicy, 10},   {Errc::kPolicyNotFound, 11},
      {Errc::kMacVerificationFailed, 12}, {Errc::kReplayedMessage, 13},
      {Errc::kMalformedCommand, 14},  {Errc::kMalformedPayload, 14},
      {Errc::kMalformedPlaintext, 14}, {Errc::kRecoveryNotPossible, 20},
      {Errc::kFileUnknown, 21},       {Errc::kFsCorrupted, 22},
      {Errc::kDeviceFull, 30},        {Errc::kUnmappedLba, 31},
      {Errc::kFileNotFound, 31},      {Errc::kHoleRead, 31},
      {Errc::kNoVictimGain, 32},      {Errc::kScriptParseError, 40},
      {Errc::kAssertionFailed, 41},   {Errc::kImageFormat, 3},
      {Errc::kIo, 3},                 {Errc::kInvalidGeometry, 2},
      {Errc::kMisaligned, 2},         {Errc::kPathTooLong, 2},
      {Errc::kPayloadTooLarge, 2},    {Errc::kEmptyImage, 1},
      {Errc::kAddressOutOfRange, 1},  {Errc::kProgramOnProgrammedPage, 1},
  };
  for (const auto& [code, exit] : table) {
    EXPECT_EQ(exit_code_for(code), exit) << errc_name(code);
  }
  EXPECT_EQ(exit_code_for(ResponseStatus::kSuccess), 0);
  EXPECT_EQ(exit_code_for(ResponseStatus::kDuplicatePolicy), 10);
  EXPECT_EQ(exit_code_for(ResponseStatus::kPolicyNotFound), 11);
  EXPECT_EQ(exit_code_for(ResponseStatus::kMacVerificationFailed), 12);
  EXPECT_EQ(exit_code_for(ResponseStatus::kReplayed), 13);
  EXPECT_EQ(exit_code_for(ResponseStatus::kMalformed), 14);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vssd_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    image_ = (dir_ / "dev.img").string();
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    std::vector<std::string> full{"vssd", "--image", image_};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }
  std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream b;
    b << in.rdbuf();
    return b.str();
  }

  fs::path dir_;
  std::string image_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(Cli, EndToEnd) {
  EXPECT_EQ(run({"--geometry", "16x8x64", "init"}), 0);
  EXPECT_EQ(run({"init"}), 2);
  EXPECT_EQ(run({"policy", "create", "/f", "5d", "0", "0"}), 0);
  EXPECT_EQ(run({"policy", "create", "/f", "5d", "0", "0"}), 10);
  EXPECT_EQ(run({"policy", "change", "/g", "5d", "0", "0"}), 11);
  EXPECT_EQ(run({"write", "/f", "0", "--pattern", "old", "--length", "64"}), 0);
  EXPECT_EQ(run({"clock", "+1d"}), 0);
  EXPECT_EQ(run({"write", "/f", "0", "--pattern", "new", "--length", "64"}), 0);
  EXPECT_EQ(run({"write", "/f", "3", "--pattern", "x", "--length", "64"}), 2);
  EXPECT_EQ(run({"clock", "day2"}), 0);
  EXPECT_EQ(run({"clock", "day1"}), 2);

  const auto out = (dir_ / "r.bin").string();
  EXPECT_EQ(run({"recover", "/f", "--time", "day0", "--out", out}), 0);
  std::string expected;
  for (int i = 0; i < 64; ++i) expected += "old"[i % 3];
  EXPECT_EQ(slurp(out), expected);
  EXPECT_EQ(run({"recover", "/f", "--version", "1", "--no-lba-list"}), 0);
  EXPECT_EQ(run({"recover", "/nope", "--time", "day0"}), 21);
  EXPECT_EQ(run({"recover", "/f"}), 2);
  EXPECT_EQ(run({"recover", "/f", "--time", "day0", "--version", "1"}), 2);

  EXPECT_EQ(run({"clock", "+10d"}), 0);
  EXPECT_EQ(run({"recover", "/f", "--time", "day0"}), 20);
  EXPECT_EQ(run({"read", "/f", "--out", out}), 0);
  EXPECT_EQ(slurp(out).substr(0, 3), "new");
  EXPECT_EQ(run({"read", "/missing"}), 31);
  EXPECT_EQ(run({"stats", "--policies"}), 0);
  EXPECT_NE(out_.str().find("policies=1"), std::string::npos) << out_.str();
  EXPECT_NE(out_.str().find("/f\t432000\t0\t0\t0"), std::string::npos) << out_.str();
  EXPECT_EQ(run({"policy", "delete", "/f"}), 0);
  EXPECT_EQ(run({"policy", "delete", "/f"}), 11);
}

TEST_F(Cli, BadArityLeavesTheImageAlone) {
  ASSERT_EQ(run({"--geometry", "16x8x64", "init"}), 0);
  const auto before = slurp(image_);
  EXPECT_EQ(run({"policy", "create", "/f", "5d"}), 2);
  EXPECT_EQ(run({"policy", "delete", "/f", "5d"}), 2);
  EXPECT_EQ(run({"policy", "create", "/f", "5x", "0", "0"}), 2);
  EXPECT_EQ(run({"policy", "rename", "/f"}), 2);
  EXPECT_EQ(slurp(image_), before);
}

TEST_F(Cli, ImageProblems) {
  EXPECT_EQ(run({"stats"}), 3);
  std::ofstream(image_) << "garbage";
  EXPECT_EQ(run({"stats"}), 3);
  EXPECT_EQ(run({"--geometry", "1x1x1", "init", "--force"}), 2);
}

TEST_F(Cli, ScenariosAndHelp) {
  EXPECT_EQ(run({"scenario", "run", "fig2b"}), 0);
  EXPECT_NE(out_.str().find("0 failed"), std::string::npos);
  const auto bad = (dir_ / "bad.txt").string();
  std::ofstream(bad) << "write /f 0 64 a\nread /f 0 64 expect b\n";
  EXPECT_EQ(run({"scenario", "run", bad}), 41);
  std::ofstream(bad) << "teleport\n";
  EXPECT_EQ(run({"scenario", "run", bad}), 40);
  EXPECT_EQ(run({"scenario", "run", (dir_ / "absent").string()}), 2);
  EXPECT_EQ(run({"--help"}), 0);
  EXPECT_EQ(run({}), 2);
  EXPECT_EQ(run({"frobnicate"}), 2);
}

TEST_F(Cli, SweepWritesCsv) {
  const auto csv = (dir_ / "s.csv").string();
  EXPECT_EQ(run({"--geometry", "32x32x4096", "sweep", "--ratios", "0,1",
                 "--kinds", "small", "--mode", "selective", "--out", csv}),
            0);
  const auto text = slurp(csv);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(run({"sweep", "--ratios", "2"}), 2);
  EXPECT_EQ(run({"sweep", "--mode", "neither"}), 2);
}

}  // namespace
}  // namespace vssd
