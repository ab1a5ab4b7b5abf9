#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vssd/flash.hpp"

namespace vssd {

/// Outcome of one executed script line.
struct StepResult {
  std::size_t line = 0;
  std::string text;
  bool ok = true;
  std::string detail;

  friend bool operator==(const StepResult&, const StepResult&) = default;
};

struct ScenarioReport {
  std::string name;
  std::vector<StepResult> steps;

  std::size_t failures() const;
  bool passed() const { return failures() == 0; }
  /// One line per step plus a summary line. Deterministic for a given script.
  std::string render() const;

  friend bool operator==(const ScenarioReport&, const ScenarioReport&) =
      default;
};

/// Default geometry for scripts that do not declare one.
inline constexpr FlashGeometry kScenarioGeometry{32, 32, 64, 256};

/// Checks every line of a script without running it. Throws
/// Errc::kScriptParseError naming the first bad line.
void parse_scenario(std::string_view script);

/// Parses, then runs the script against a fresh device. A failed step does
/// not stop the run; check report.passed().
///
/// Script language: one step per line, '#' starts a comment.
///
///     geometry BxPxS                      (first step only)
///     clock+<duration> | clock@<time>
///     mode almanac <rt> | mode selective
///     policy create|change <path> <rt> <bc> <v> [expect <status>]
///     policy delete <path> [expect <status>]
///     write <path> <offset> <len> <pattern>
///     read <path> <offset> <len> expect|expect-not <pattern>
///     attack drop_pbset|tamper_payload|tamper_lba|tamper_policy_envelope on|off
///     corrupt-fs
///     forge-policy delete <path> random-key|tamper|replay expect <status>
///     device <request line>
///     gc
///     recover <path> time <t>|version <n> [scan] [apply]
///             expect ok [<pattern>] | ok-not <pattern> | fail | unknown
///     assert-ov-count <n> [<path> ...]
///     assert-policy <path> present|absent
///
/// Statuses: success, duplicate-policy, policy-not-found, malformed,
/// mac-failure, replayed. A pattern is a token repeated cyclically.
ScenarioReport run_scenario(std::string_view script,
                            std::string name = "script");

/// Built-in scripts by name (fig2a, fig2b, attack1 ... attack6).
std::optional<std::string_view> builtin_scenario(std::string_view name);
std::vector<std::string> builtin_scenario_names();

}  // namespace vssd
