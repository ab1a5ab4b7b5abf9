#include <gtest/gtest.h>

#include "vssd/error.hpp"
#include "vssd/scenario.hpp"

namespace vssd {
namespace {

TEST(Scenario, BuiltinsPass) {
  const auto names = builtin_scenario_names();
  ASSERT_EQ(names.size(), 8u);
  for (const auto& name : names) {
    const auto script = builtin_scenario(name);
    ASSERT_TRUE(script) << name;
    const auto report = run_scenario(*script, name);
    EXPECT_TRUE(report.passed()) << report.render();
  }
  EXPECT_FALSE(builtin_scenario("fig9"));
}

TEST(Scenario, ReportIsDeterministic) {
  for (const auto& name : builtin_scenario_names()) {
    const auto script = *builtin_scenario(name);
    EXPECT_EQ(run_scenario(script, name), run_scenario(script, name)) << name;
  }
}

TEST(Scenario, FailedStepsAreReportedNotThrown) {
  const auto report = run_scenario(R"(write /f 0 64 a
read /f 0 64 expect b
read /f 0 64 expect a
)");
  ASSERT_EQ(report.steps.size(), 3u);
  EXPECT_FALSE(report.steps[1].ok);
  EXPECT_TRUE(report.steps[2].ok);
  EXPECT_EQ(report.failures(), 1u);
  EXPECT_NE(report.render().find("1 failed"), std::string::npos);
}

TEST(Scenario, ParseErrorsNameTheLine) {
  for (const auto& [script, line] :
       std::vector<std::pair<std::string, std::string>>{
           {"clock+1d\nfrobnicate\n", "line 2"},
           {"write /f 0 64\n", "line 1"},
           {"clock+1d\ngeometry 8x8x64\n", "line 2"},
           {"policy create /f 1d 0\n", "line 1"},
           {"recover /f time day1 expect maybe\n", "line 1"},
           {"policy delete /f expect happy\n", "line 1"}}) {
    try {
      parse_scenario(script);
      FAIL() << script;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kScriptParseError);
      EXPECT_NE(std::string(e.what()).find(line), std::string::npos) << e.what();
    }
  }
  EXPECT_NO_THROW(parse_scenario("# only a comment\n\n"));
}

TEST(Scenario, PolicyStatusesAndDeviceLines) {
  const auto report = run_scenario(R"(geometry 16x8x64
policy create /f 1d 0 0 expect success
policy create /f 1d 0 0 expect duplicate-policy
policy change /g 1d 0 0 expect policy-not-found
write /f 0 64 x
device READ 0
device STATS
clock+2d
assert-policy /f present
policy delete /f
assert-policy /f absent
)");
  EXPECT_TRUE(report.passed()) << report.render();
}

TEST(Scenario, AlmanacVersusSelectiveCounts) {
  const std::string body = R"(clock@day0
write /a 0 64 one
write /b 0 64 one
clock@day1
write /a 0 64 two
write /b 0 64 two
)";
  EXPECT_TRUE(run_scenario("mode almanac 3d\n" + body +
                           "assert-ov-count 2 /a /b\n")
                  .passed());
  EXPECT_TRUE(run_scenario("policy create /a 3d 0 0\n" + body +
                           "assert-ov-count 1 /a /b\n")
                  .passed());
}

}  // namespace
}  // namespace vssd
