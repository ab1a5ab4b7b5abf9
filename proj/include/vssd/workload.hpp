#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vssd/flash.hpp"
#include "vssd/types.hpp"

namespace vssd {

enum class WorkloadKind { kBig, kSmall };
enum class VersioningMode { kSelective, kAlmanac };

std::string_view workload_kind_name(WorkloadKind kind) noexcept;
std::string_view versioning_mode_name(VersioningMode mode) noexcept;

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kBig;
  /// Fraction of the device holding unique file data.
  double capacity_ratio = 0.5;
  /// Fraction of that data under a policy (selective mode only).
  double versioning_ratio = 0.0;
  /// Whole-file overwrites; twice the device size in pages when unset.
  std::optional<std::size_t> op_count;
  std::uint64_t seed = 7;
  /// Retention time of every policy (and of almanac mode).
  Duration rt = 3 * kDay;
  FlashGeometry geometry{};
  /// Raw NAND write bandwidth used for the throughput estimate.
  double raw_write_mb_s = 65.0;

  /// Pages per file: a 20 MB file on a 1 GiB-class device scaled to the
  /// geometry (BIG), or 32 KiB (SMALL).
  std::uint32_t file_pages() const;
  /// Throws std::invalid_argument for ratios outside [0, 1] or a device too
  /// small for one file.
  void validate() const;
};

struct MetricsReport {
  std::uint64_t host_pages_written = 0;
  std::uint64_t nand_pages_programmed = 0;
  /// nand / host over the measured phase.
  double write_amplification = 0.0;
  std::uint64_t gc_invocations = 0;
  std::uint64_t ov_pages_resident = 0;
  std::uint64_t relocations = 0;
  std::size_t files = 0;
  std::size_t versioned_files = 0;
  std::size_t overwrites = 0;
  /// Overwrites refused because the device was full.
  std::size_t device_full_events = 0;
  /// raw_write_mb_s / WAF. A model, not a measurement.
  double est_throughput_mb_s = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Pre-fills the device with untagged data (so every page starts out as an
/// invalid page), writes the file set, then measures `op_count` uniformly
/// random whole-file overwrites. The clock advances between overwrites so
/// that one retention window spans 60% of the free space.
MetricsReport run_workload(const WorkloadSpec& spec, VersioningMode mode);

struct SweepRow {
  VersioningMode mode = VersioningMode::kSelective;
  double capacity_ratio = 0.0;
  double versioning_ratio = 0.0;
  WorkloadKind kind = WorkloadKind::kBig;
  MetricsReport metrics;
};

struct SweepGrid {
  std::vector<double> versioning_ratios{0, 0.25, 0.5, 0.75, 1};
  std::vector<double> capacity_ratios{0.5};
  std::vector<WorkloadKind> kinds{WorkloadKind::kBig};
  std::vector<VersioningMode> modes{VersioningMode::kSelective,
                                    VersioningMode::kAlmanac};
  std::uint64_t seed = 7;
  FlashGeometry geometry{};
};

/// Rows ordered mode, kind, capacity, versioning ratio.
std::vector<SweepRow> run_sweep(const SweepGrid& grid);

/// Header plus one row per run:
/// mode,capacity_ratio,versioning_ratio,kind,WAF,gc_invocations,ov_resident,est_throughput
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace vssd
