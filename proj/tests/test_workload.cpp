#include <gtest/gtest.h>

#include <cmath>

#include "vssd/workload.hpp"

namespace vssd {
namespace {

WorkloadSpec spec(WorkloadKind kind, double cap, double ver) {
  WorkloadSpec s;
  s.kind = kind;
  s.capacity_ratio = cap;
  s.versioning_ratio = ver;
  return s;
}

TEST(Workload, Validation) {
  EXPECT_THROW(spec(WorkloadKind::kBig, 1.5, 0).validate(), std::invalid_argument);
  EXPECT_THROW(spec(WorkloadKind::kBig, 0.5, -0.1).validate(), std::invalid_argument);
  auto tiny = spec(WorkloadKind::kBig, 0.01, 0);
  tiny.geometry = FlashGeometry{4, 4, 64, 256};
  EXPECT_THROW(tiny.validate(), std::invalid_argument);
  EXPECT_NO_THROW(spec(WorkloadKind::kSmall, 0.75, 1).validate());
  EXPECT_GT(spec(WorkloadKind::kBig, .5, 0).file_pages(),
            spec(WorkloadKind::kSmall, .5, 0).file_pages());
}

TEST(Workload, SameSeedSameReport) {
  const auto s = spec(WorkloadKind::kSmall, 0.5, 0.5);
  EXPECT_EQ(run_workload(s, VersioningMode::kSelective),
            run_workload(s, VersioningMode::kSelective));
  auto other = s;
  other.seed = 8;
  EXPECT_NE(run_workload(s, VersioningMode::kSelective).nand_pages_programmed,
            run_workload(other, VersioningMode::kSelective).nand_pages_programmed);
}

TEST(Workload, ReportIsConsistent) {
  const auto r = run_workload(spec(WorkloadKind::kBig, 0.5, 0.25),
                              VersioningMode::kSelective);
  ASSERT_GT(r.host_pages_written, 0u);
  EXPECT_DOUBLE_EQ(r.write_amplification,
                   static_cast<double>(r.nand_pages_programmed) /
                       static_cast<double>(r.host_pages_written));
  EXPECT_GE(r.write_amplification, 1.0);
  EXPECT_DOUBLE_EQ(r.est_throughput_mb_s, 65.0 / r.write_amplification);
  EXPECT_GT(r.gc_invocations, 0u);
  EXPECT_EQ(r.device_full_events, 0u);
  EXPECT_GT(r.versioned_files, 0u);
  EXPECT_LT(r.versioned_files, r.files);
}

TEST(WorkloadProperty, WafGrowsWithVersioningAndStaysBelowAlmanac) {
  SweepGrid grid;
  grid.kinds = {WorkloadKind::kSmall};
  grid.capacity_ratios = {0.5};
  const auto rows = run_sweep(grid);
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_GE(rows[i].metrics.write_amplification,
              rows[i - 1].metrics.write_amplification);
  }
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i].mode, VersioningMode::kSelective);
    EXPECT_EQ(rows[i + 5].mode, VersioningMode::kAlmanac);
    EXPECT_LE(rows[i].metrics.write_amplification,
              rows[i + 5].metrics.write_amplification);
  }
  const double s = rows[4].metrics.write_amplification;
  const double a = rows[9].metrics.write_amplification;
  EXPECT_LE(std::abs(s - a) / a, 0.01);
}

TEST(Workload, CsvLayout) {
  SweepRow row;
  row.capacity_ratio = 0.5;
  row.metrics.write_amplification = 1.5;
  row.metrics.gc_invocations = 3;
  row.metrics.ov_pages_resident = 4;
  row.metrics.est_throughput_mb_s = 43.3;
  const auto csv = sweep_csv({row});
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "mode,capacity_ratio,versioning_ratio,kind,WAF,gc_invocations,"
            "ov_resident,est_throughput");
  EXPECT_NE(csv.find("selective,0.5,0,big,1.500000,3,4,43.300"), std::string::npos)
      << csv;
}

}  // namespace
}  // namespace vssd
