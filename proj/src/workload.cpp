#include "vssd/workload.hpp"

#include <fmt/format.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "vssd/error.hpp"
#include "vssd/host_fs.hpp"

namespace vssd {

namespace {

// Share of the free space (device minus file data) that one retention
// window of overwrites may fill with old versions. The rest is GC headroom.
constexpr double kOverwriteBudget = 0.6;
// Length of the measured phase, in multiples of the device size.
constexpr std::uint64_t kMeasuredDeviceWrites = 2;

Bytes page_data(std::uint32_t page_size, std::uint64_t stamp) {
  Bytes out(page_size);
  for (std::uint32_t i = 0; i < page_size; ++i) {
    out[i] = static_cast<std::uint8_t>((stamp >> (8 * (i % 8))) + i / 8);
  }
  return out;
}

}  // namespace

std::string_view workload_kind_name(WorkloadKind kind) noexcept {
  return kind == WorkloadKind::kBig ? "big" : "small";
}

std::string_view versioning_mode_name(VersioningMode mode) noexcept {
  return mode == VersioningMode::kSelective ? "selective" : "almanac";
}

std::uint32_t WorkloadSpec::file_pages() const {
  if (kind == WorkloadKind::kSmall) {
    return std::max<std::uint32_t>(1, 32 * 1024 / geometry.page_size);
  }
  const double scaled = static_cast<double>(geometry.total_pages()) * 20.0 /
                        1024.0;
  return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(scaled)));
}

void WorkloadSpec::validate() const {
  geometry.validate();
  auto in_unit = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!in_unit(capacity_ratio) || !in_unit(versioning_ratio)) {
    throw std::invalid_argument("ratios must lie in [0, 1]");
  }
  if (file_pages() > geometry.total_pages() / 2) {
    throw std::invalid_argument("device too small for the file size");
  }
  if (capacity_ratio * static_cast<double>(geometry.total_pages()) <
      file_pages()) {
    throw std::invalid_argument("capacity ratio leaves room for no file");
  }
}

MetricsReport run_workload(const WorkloadSpec& spec, VersioningMode mode) {
  spec.validate();
  const auto& g = spec.geometry;
  const std::uint64_t n = g.total_pages();
  const std::uint32_t fp = spec.file_pages();

  Session session(g);
  auto& dev = session.device;
  if (mode == VersioningMode::kAlmanac) dev.set_almanac(spec.rt);

  MetricsReport m;
  m.files = static_cast<std::size_t>(
      std::floor(spec.capacity_ratio * static_cast<double>(n) / fp));
  m.versioned_files =
      mode == VersioningMode::kAlmanac
          ? m.files
          : static_cast<std::size_t>(
                std::lround(spec.versioning_ratio * static_cast<double>(m.files)));
  auto path_of = [](std::size_t i) { return fmt::format("/w/file{:05}", i); };

  if (mode == VersioningMode::kSelective) {
    for (std::size_t i = 0; i < m.versioned_files; ++i) {
      const auto msg = session.policy(
          PolicyCommand::create(path_of(i), ConfigParams{spec.rt, 0, 0}));
      if (msg.status != ResponseStatus::kSuccess) {
        throw std::logic_error("policy setup rejected");
      }
    }
  }

  // Pre-fill: untagged writes cycling over the LBAs the files will use, until
  // all but two blocks have been programmed once.
  const std::uint64_t file_lbas = static_cast<std::uint64_t>(m.files) * fp;
  std::uint64_t stamp = 0;
  if (file_lbas > 0) {
    const std::uint64_t prefill = n - 2ULL * g.pages_per_block;
    for (std::uint64_t i = 0; i < prefill; ++i) {
      dev.write(i % file_lbas, page_data(g.page_size, ++stamp), std::nullopt);
    }
  }

  Bytes file(static_cast<std::size_t>(fp) * g.page_size);
  auto fill_file = [&] {
    for (std::uint32_t p = 0; p < fp; ++p) {
      const auto page = page_data(g.page_size, ++stamp);
      std::copy(page.begin(), page.end(),
                file.begin() + static_cast<std::ptrdiff_t>(p) * g.page_size);
    }
  };
  for (std::size_t i = 0; i < m.files; ++i) {
    fill_file();
    session.fs.write(path_of(i), 0, file);
  }

  // Measured phase: whole-file overwrites of uniformly chosen files. The
  // clock advances so that one retention window covers `window` pages of
  // overwrites; older versions expire and the device reaches steady state.
  const auto window = std::max<std::uint64_t>(
      fp, static_cast<std::uint64_t>(kOverwriteBudget *
                                     (1.0 - spec.capacity_ratio) *
                                     static_cast<double>(n)));
  const Duration tick = std::max<Duration>(
      1, spec.rt * static_cast<Duration>(fp) / static_cast<Duration>(window));
  m.overwrites = spec.op_count.value_or(
      static_cast<std::size_t>((kMeasuredDeviceWrites * n + fp - 1) / fp));

  const auto before = dev.stats();
  std::mt19937_64 rng(spec.seed);
  if (m.files > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, m.files - 1);
    for (std::size_t op = 0; op < m.overwrites; ++op) {
      dev.advance_to(dev.now() + tick);
      fill_file();
      try {
        session.fs.write(path_of(pick(rng)), 0, file);
      } catch (const Error& e) {
        if (e.code() != Errc::kDeviceFull) throw;
        ++m.device_full_events;
      }
    }
  }
  const auto after = dev.stats();

  m.host_pages_written = after.host_pages_written - before.host_pages_written;
  m.nand_pages_programmed =
      after.nand_pages_programmed - before.nand_pages_programmed;
  m.gc_invocations = after.gc_invocations - before.gc_invocations;
  m.relocations = after.relocations - before.relocations;
  m.ov_pages_resident = after.ov_pages_resident;
  m.write_amplification =
      m.host_pages_written == 0
          ? 1.0
          : static_cast<double>(m.nand_pages_programmed) /
                static_cast<double>(m.host_pages_written);
  m.est_throughput_mb_s = spec.raw_write_mb_s / m.write_amplification;
  return m;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid) {
  std::vector<SweepRow> rows;
  for (auto mode : grid.modes) {
    for (auto kind : grid.kinds) {
      for (double cap : grid.capacity_ratios) {
        for (double ver : grid.versioning_ratios) {
          WorkloadSpec spec;
          spec.kind = kind;
          spec.capacity_ratio = cap;
          spec.versioning_ratio = ver;
          spec.seed = grid.seed;
          spec.geometry = grid.geometry;
          rows.push_back(SweepRow{mode, cap, ver, kind, run_workload(spec, mode)});
        }
      }
    }
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "mode,capacity_ratio,versioning_ratio,kind,WAF,gc_invocations,"
      "ov_resident,est_throughput\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:g},{:g},{},{:.6f},{},{},{:.3f}\n",
                       versioning_mode_name(r.mode), r.capacity_ratio,
                       r.versioning_ratio, workload_kind_name(r.kind),
                       r.metrics.write_amplification, r.metrics.gc_invocations,
                       r.metrics.ov_pages_resident,
                       r.metrics.est_throughput_mb_s);
  }
  return out;
}

}  // namespace vssd
