#include "vssd/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vssd/duration.hpp"
#include "vssd/image.hpp"
#include "vssd/recovery.hpp"
#include "vssd/scenario.hpp"
#include "vssd/workload.hpp"

namespace vssd {

int exit_code_for(Errc code) noexcept {
  switch (code) {
    case Errc::kDuplicatePolicy: return exit_code::kDuplicatePolicy;
    case Errc::kPolicyNotFound: return exit_code::kPolicyNotFound;
    case Errc::kMacVerificationFailed: return exit_code::kMacVerificationFailed;
    case Errc::kReplayedMessage: return exit_code::kReplayed;
    case Errc::kMalformedCommand:
    case Errc::kMalformedPayload:
    case Errc::kMalformedPlaintext: return exit_code::kMalformed;
    case Errc::kRecoveryNotPossible: return exit_code::kRecoveryNotPossible;
    case Errc::kFileUnknown: return exit_code::kFileUnknown;
    case Errc::kFsCorrupted: return exit_code::kFsCorrupted;
    case Errc::kDeviceFull: return exit_code::kDeviceFull;
    case Errc::kUnmappedLba:
    case Errc::kFileNotFound:
    case Errc::kHoleRead: return exit_code::kNotFound;
    case Errc::kNoVictimGain: return exit_code::kNoVictimGain;
    case Errc::kScriptParseError: return exit_code::kScenarioParse;
    case Errc::kAssertionFailed: return exit_code::kScenarioFailed;
    case Errc::kImageFormat:
    case Errc::kIo: return exit_code::kImage;
    case Errc::kInvalidGeometry:
    case Errc::kMisaligned:
    case Errc::kPathTooLong:
    case Errc::kPayloadTooLarge: return exit_code::kUsage;
    default: return exit_code::kFailure;
  }
}

int exit_code_for(ResponseStatus status) noexcept {
  switch (status) {
    case ResponseStatus::kSuccess: return exit_code::kOk;
    case ResponseStatus::kDuplicatePolicy: return exit_code::kDuplicatePolicy;
    case ResponseStatus::kPolicyNotFound: return exit_code::kPolicyNotFound;
    case ResponseStatus::kMalformed: return exit_code::kMalformed;
    case ResponseStatus::kMacVerificationFailed:
      return exit_code::kMacVerificationFailed;
    case ResponseStatus::kReplayed: return exit_code::kReplayed;
  }
  return exit_code::kFailure;
}

namespace {

struct Options {
  std::string image = "vssd.img";
  std::uint64_t seed = 7;
  std::string geometry;

  std::string policy_kind;
  std::string policy_path;
  std::vector<std::string> policy_params;

  std::string path;
  std::string time;
  std::optional<std::uint32_t> version;
  bool no_lba_list = false;
  bool apply = false;
  std::string out;

  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::string from;
  std::string pattern;

  std::string clock;
  std::string scenario;

  std::string ratios = "0,0.25,0.5,0.75,1";
  std::string capacities = "0.5";
  std::string kinds = "big";
  std::string mode = "both";

  bool dump_policies = false;
  bool force = false;
};

// Thrown for bad arguments that CLI11 cannot see (exit code 2).
struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || v < 0.0 || v > 1.0) throw std::out_of_range("");
      out.push_back(v);
    } catch (const std::exception&) {
      throw Usage("ratio '" + item + "' is not a number in [0, 1]");
    }
  }
  if (out.empty()) throw Usage("empty ratio list");
  return out;
}

Duration usage_duration(const std::string& text) {
  try {
    return parse_duration(text);
  } catch (const std::invalid_argument&) {
    throw Usage("bad duration '" + text + "' (use 3d, 12h, 30m, 45s or seconds)");
  }
}

Timestamp usage_time(const std::string& text) {
  try {
    return parse_time(text);
  } catch (const std::invalid_argument&) {
    throw Usage("bad time '" + text + "' (use dayN or a duration)");
  }
}

FlashGeometry geometry_of(const Options& o) {
  if (o.geometry.empty()) return FlashGeometry{};
  try {
    return parse_geometry(o.geometry);
  } catch (const Error& e) {
    throw Usage(e.what());
  } catch (const std::invalid_argument& e) {
    throw Usage(e.what());
  }
}

std::string when(Timestamp t) {
  return fmt::format("{} (day {} + {})", t, t / kDay, format_duration(t % kDay));
}

class Commands {
 public:
  Commands(const Options& o, std::ostream& out) : o_(o), out_(out) {}

  int init() {
    if (std::filesystem::exists(o_.image) && !o_.force) {
      throw Usage(o_.image + " exists; pass --force to replace it");
    }
    Session session(geometry_of(o_));
    save_image(o_.image, session);
    const auto& g = session.device.ftl().geometry();
    fmt::print(out_, "initialized {}: {} blocks x {} pages x {} bytes\n",
               o_.image, g.blocks, g.pages_per_block, g.page_size);
    return exit_code::kOk;
  }

  int policy() {
    const auto& kind = o_.policy_kind;
    const auto& p = o_.policy_params;
    PolicyCommand cmd;
    if (kind == "delete") {
      if (!p.empty()) throw Usage("policy delete takes only a path");
      cmd = PolicyCommand::remove(o_.policy_path);
    } else {
      if (p.size() != 3) {
        throw Usage("policy " + kind + " needs <path> <rt> <bc> <v>");
      }
      std::uint32_t v = 0;
      try {
        std::size_t used = 0;
        const auto parsed = std::stoul(p[2], &used);
        if (used != p[2].size() || parsed > 0xFFFFFFFFUL) throw std::out_of_range("");
        v = static_cast<std::uint32_t>(parsed);
      } catch (const std::exception&) {
        throw Usage("version count '" + p[2] + "' is not a non-negative integer");
      }
      const ConfigParams cp{usage_duration(p[0]), usage_duration(p[1]), v};
      cmd = kind == "create" ? PolicyCommand::create(o_.policy_path, cp)
                             : PolicyCommand::change(o_.policy_path, cp);
    }
    auto session = load_image(o_.image);
    const auto msg = session->policy(cmd);
    save_image(o_.image, *session);
    fmt::print(out_, "{} {}: {}\n", command_kind_name(cmd.kind), cmd.path,
               response_status_name(msg.status));
    return exit_code_for(msg.status);
  }

  int write() {
    Bytes data;
    if (!o_.from.empty()) {
      std::ifstream in(o_.from, std::ios::binary);
      if (!in) throw Error(Errc::kIo, "cannot read " + o_.from);
      data.assign(std::istreambuf_iterator<char>(in), {});
    } else {
      if (o_.pattern.empty() || o_.length == 0) {
        throw Usage("write needs --from <file> or --pattern <text> --length <n>");
      }
      data.resize(o_.length);
      for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<std::uint8_t>(o_.pattern[i % o_.pattern.size()]);
      }
    }
    auto session = load_image(o_.image);
    session->fs.write(o_.path, o_.offset, data);
    save_image(o_.image, *session);
    fmt::print(out_, "wrote {} bytes to {} at {}\n", data.size(), o_.path,
               o_.offset);
    return exit_code::kOk;
  }

  int read() {
    auto session = load_image(o_.image);
    const auto data = o_.length == 0
                          ? session->fs.read_all(o_.path)
                          : session->fs.read(o_.path, o_.offset, o_.length);
    emit(data);
    return exit_code::kOk;
  }

  int clock() {
    auto session = load_image(o_.image);
    auto& dev = session->device;
    if (!o_.clock.empty()) {
      const Timestamp t = o_.clock.front() == '+'
                              ? dev.now() + usage_duration(o_.clock.substr(1))
                              : usage_time(o_.clock);
      if (t < dev.now()) throw Usage("the device clock cannot move backwards");
      dev.advance_to(t);
      save_image(o_.image, *session);
    }
    fmt::print(out_, "now {}\n", when(dev.now()));
    return exit_code::kOk;
  }

  int recover() {
    if (o_.time.empty() == !o_.version.has_value()) {
      throw Usage("recover needs exactly one of --time or --version");
    }
    const RecoveryTarget target =
        o_.version ? RecoveryTarget{VersionTarget{*o_.version}}
                   : RecoveryTarget{TimeTarget{usage_time(o_.time)}};
    auto session = load_image(o_.image);
    const auto req =
        make_recovery_request(session->fs, o_.path, target, !o_.no_lba_list);
    const auto image = session->device.recover(req);

    fmt::print(out_, "{} at {}{}\n", image.path, describe(image.target),
               req.lba_list ? "" : " (exhaustive scan)");
    fmt::print(out_, "{:>10}  {:>12}  {:>8}  {}\n", "offset", "ppa", "bytes",
               "written");
    for (const auto& c : image.chunks) {
      fmt::print(out_, "{:>10}  {:>12}  {:>8}  {}\n", c.offset,
                 fmt::format("({},{})", c.ppa.block, c.ppa.page),
                 c.data.size(), when(c.wt));
    }
    if (image.mixed_versions) {
      fmt::print(out_,
                 "warning: blocks come from different write times; the result "
                 "may not be a state the file was ever in\n");
    }
    if (!o_.out.empty()) {
      write_file(o_.out, image.contents());
      fmt::print(out_, "wrote {} bytes to {}\n", image.contents().size(), o_.out);
    }
    if (o_.apply) {
      apply_recovery(session->fs, image);
      save_image(o_.image, *session);
      fmt::print(out_, "restored {} through the file system\n", image.path);
    }
    return exit_code::kOk;
  }

  int scenario() {
    std::string script;
    std::string name = o_.scenario;
    if (auto builtin = builtin_scenario(o_.scenario)) {
      script = std::string(*builtin);
    } else {
      std::ifstream in(o_.scenario);
      if (!in) {
        throw Usage("'" + o_.scenario + "' is neither a built-in scenario (" +
                    fmt::format("{}", fmt::join(builtin_scenario_names(), ", ")) +
                    ") nor a readable file");
      }
      std::ostringstream buf;
      buf << in.rdbuf();
      script = buf.str();
    }
    const auto report = run_scenario(script, name);
    out_ << report.render();
    if (!o_.out.empty()) {
      std::ofstream f(o_.out);
      f << report.render();
    }
    return report.passed() ? exit_code::kOk : exit_code::kScenarioFailed;
  }

  int sweep() {
    SweepGrid grid;
    grid.versioning_ratios = parse_ratios(o_.ratios);
    grid.capacity_ratios = parse_ratios(o_.capacities);
    grid.kinds.clear();
    for (const auto& k : split_list(o_.kinds)) {
      if (k == "big") {
        grid.kinds.push_back(WorkloadKind::kBig);
      } else if (k == "small") {
        grid.kinds.push_back(WorkloadKind::kSmall);
      } else {
        throw Usage("workload kind must be big or small");
      }
    }
    if (grid.kinds.empty()) throw Usage("empty kind list");
    if (o_.mode == "both") {
      grid.modes = {VersioningMode::kSelective, VersioningMode::kAlmanac};
    } else if (o_.mode == "selective") {
      grid.modes = {VersioningMode::kSelective};
    } else if (o_.mode == "almanac") {
      grid.modes = {VersioningMode::kAlmanac};
    } else {
      throw Usage("mode must be selective, almanac or both");
    }
    grid.seed = o_.seed;
    grid.geometry = geometry_of(o_);
    const auto csv = sweep_csv(run_sweep(grid));
    if (o_.out.empty()) {
      out_ << csv;
    } else {
      std::ofstream f(o_.out);
      if (!f) throw Error(Errc::kIo, "cannot write " + o_.out);
      f << csv;
    }
    return exit_code::kOk;
  }

  int gc() {
    auto session = load_image(o_.image);
    const auto r = session->device.gc();
    save_image(o_.image, *session);
    fmt::print(out_,
               "victim block {}: relocated {} valid + {} old versions, "
               "reclaimed {} invalid + {} expired\n",
               r.victim_block, r.relocated_valid, r.relocated_ov,
               r.reclaimed_invalid, r.reclaimed_expired);
    return exit_code::kOk;
  }

  int stats() {
    auto session = load_image(o_.image);
    out_ << format_stats(session->device.stats()) << '\n';
    if (o_.dump_policies) out_ << session->device.ftl().policies().dump();
    return exit_code::kOk;
  }

 private:
  void write_file(const std::string& path, const Bytes& data) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::kIo, "cannot write " + path);
    f.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  }

  void emit(const Bytes& data) {
    if (!o_.out.empty()) {
      write_file(o_.out, data);
      fmt::print(out_, "wrote {} bytes to {}\n", data.size(), o_.out);
    } else {
      out_ << to_hex(data) << '\n';
    }
  }

  const Options& o_;
  std::ostream& out_;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  Options o;
  CLI::App app{"Simulator of a policy-based versioning SSD", "vssd"};
  app.require_subcommand(1);
  app.add_option("--image", o.image, "Device image file")->capture_default_str();
  app.add_option("--seed", o.seed, "Random seed for workloads")
      ->capture_default_str();
  app.add_option("--geometry", o.geometry,
                 "Flash geometry BxPxS (blocks x pages per block x page size)");

  auto* init = app.add_subcommand("init", "Create a fresh device image");
  init->add_flag("--force", o.force, "Replace an existing image");

  auto* policy = app.add_subcommand(
      "policy", "Send a policy command over the secure channel");
  policy->add_option("kind", o.policy_kind, "create | change | delete")
      ->required()
      ->check(CLI::IsMember({"create", "change", "delete"}));
  policy->add_option("path", o.policy_path, "File path")->required();
  policy->add_option("params", o.policy_params,
                     "<retention> <backup-cycle> <versions> for create/change");

  auto* recover = app.add_subcommand("recover", "Roll a file back");
  recover->add_option("path", o.path, "File path")->required();
  auto* time_opt =
      recover->add_option("--time", o.time, "Target time (dayN or duration)");
  recover->add_option("--version", o.version, "Versions to go back (0 = live)")
      ->excludes(time_opt);
  recover->add_flag("--no-lba-list", o.no_lba_list,
                    "Scan every physical page instead of asking the file system");
  recover->add_option("--out", o.out, "Write the recovered bytes here");
  recover->add_flag("--apply", o.apply,
                    "Write the recovered contents back through the file system");

  auto* write = app.add_subcommand("write", "Write file data through the host");
  write->add_option("path", o.path, "File path")->required();
  write->add_option("offset", o.offset, "Byte offset (page aligned)")->required();
  write->add_option("--from", o.from, "Host file with the data");
  write->add_option("--pattern", o.pattern, "Text repeated to fill --length");
  write->add_option("--length", o.length, "Bytes to write with --pattern");

  auto* read = app.add_subcommand("read", "Read file data through the host");
  read->add_option("path", o.path, "File path")->required();
  read->add_option("--offset", o.offset, "Byte offset (page aligned)");
  read->add_option("--length", o.length, "Bytes to read (default: whole file)");
  read->add_option("--out", o.out, "Write the bytes here instead of hex");

  auto* clock = app.add_subcommand("clock", "Show or move the device clock");
  clock->add_option("when", o.clock, "+<duration> to advance, or dayN / seconds");

  auto* scenario = app.add_subcommand("scenario", "Scenario scripts");
  scenario->require_subcommand(1);
  auto* scenario_run = scenario->add_subcommand("run", "Run a scenario");
  scenario_run->add_option("script", o.scenario, "Built-in name or script file")
      ->required();
  scenario_run->add_option("--out", o.out, "Also write the report here");

  auto* sweep = app.add_subcommand("sweep", "Write-amplification sweep (CSV)");
  sweep->add_option("--ratios", o.ratios, "Versioning ratios")
      ->capture_default_str();
  sweep->add_option("--capacities", o.capacities, "Capacity ratios")
      ->capture_default_str();
  sweep->add_option("--kinds", o.kinds, "big, small or both: big,small")
      ->capture_default_str();
  sweep->add_option("--mode", o.mode, "selective | almanac | both")
      ->capture_default_str();
  sweep->add_option("--out", o.out, "CSV file (default: stdout)");

  auto* gc = app.add_subcommand("gc", "Run one garbage-collection pass");
  auto* stats = app.add_subcommand("stats", "Print device counters");
  stats->add_flag("--policies", o.dump_policies, "Also dump the policy table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return exit_code::kUsage;
  }

  Commands cmd(o, out);
  try {
    if (init->parsed()) return cmd.init();
    if (policy->parsed()) return cmd.policy();
    if (recover->parsed()) return cmd.recover();
    if (write->parsed()) return cmd.write();
    if (read->parsed()) return cmd.read();
    if (clock->parsed()) return cmd.clock();
    if (scenario_run->parsed()) return cmd.scenario();
    if (sweep->parsed()) return cmd.sweep();
    if (gc->parsed()) return cmd.gc();
    if (stats->parsed()) return cmd.stats();
  } catch (const Usage& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kFailure;
  }
  return exit_code::kUsage;
}

}  // namespace vssd
