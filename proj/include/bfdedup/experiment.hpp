#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bfdedup/filters.hpp"
#include "bfdedup/metrics.hpp"
#include "bfdedup/streams.hpp"

namespace bfdedup {

inline constexpr std::string_view kReportHeader =
    "m,algorithm,fp,fn,tp_dup,tn_dis,fpr_pct,fnr_pct,load_fraction,seed";
inline constexpr std::string_view kTheoryHeader = "m,X,Y,FPR,FNR";

struct ExperimentConfig {
  FilterConfig filter;                          // filter.algorithm is ignored
  std::vector<Algorithm> algorithms{Algorithm::bsbf};
  StreamSpec stream;
  std::uint64_t report_interval = 0;            // 0: summary row only
  std::uint64_t window = 0;                     // 0: cumulative checkpoint rows
  OracleMode oracle = OracleMode::digest;

  void validate() const;
};

struct ReportRow {
  std::uint64_t m = 0;
  bool summary = false;
  Algorithm algorithm = Algorithm::bsbf;
  Counters counters;
  double load_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct ExperimentReport {
  Algorithm algorithm = Algorithm::bsbf;
  std::vector<ReportRow> checkpoints;
  ReportRow summary;
};

// Streams config.stream through the exact oracle and one filter. A
// checkpoint row is taken after every report_interval elements; with a
// window, checkpoint counters cover the trailing `window` elements only. The
// summary row is always cumulative over the whole stream.
[[nodiscard]] auto run_experiment(const ExperimentConfig& config, Algorithm algorithm)
    -> ExperimentReport;

// Header plus one line per checkpoint plus the summary line ("summary" in
// the m column). Rates and load use 6 significant digits.
void write_report_csv(const ExperimentReport& report, std::ostream& out);
[[nodiscard]] auto format_row(const ReportRow& row) -> std::string;

// key,value pairs describing how a report was produced.
void write_report_metadata(const ExperimentConfig& config, Algorithm algorithm, std::ostream& out);

// Output path for one algorithm of a multi-algorithm run:
// "dir/report.csv" -> "dir/report_bsbf.csv".
[[nodiscard]] auto per_algorithm_path(const std::filesystem::path& base, Algorithm algorithm)
    -> std::filesystem::path;

// Joins report files that share a checkpoint grid into one wide CSV with a
// shared m column and one column group per report. Throws
// std::invalid_argument naming the offending files when grids differ.
void compare_reports(const std::vector<std::filesystem::path>& reports, std::ostream& out);

struct TheoryRequest {
  Algorithm algorithm = Algorithm::bsbf; // rsbf, bsbf, bsbfsd or rlbsbf
  std::size_t k = 2;
  std::size_t s = 1;
  std::uint64_t universe = 1;
  double pstar = 0.03;
  std::size_t m_max = 1;
  std::vector<double> load_trajectory; // rlbsbf only
};

// Rows m = 1..m_max of (m, X, Y, FPR, FNR), 10 significant digits.
void write_theory_csv(const TheoryRequest& request, std::ostream& out);

// Reads a load trajectory: either one number per line, or a CSV whose header
// has a `mean_load` column (the format written by write_trace_csv).
[[nodiscard]] auto read_load_trajectory(const std::filesystem::path& path) -> std::vector<double>;

// Monte-Carlo view of a filter on uniform-universe streams: for each position
// m, the fraction of runs whose probe found all bits set (an estimate of X_m)
// and the mean per-partition load just before element m.
struct UniformTrace {
  std::vector<double> duplicate_fraction;
  std::vector<double> mean_load;
};

// Run r uses filter seed and stream seed base.seed + r.
[[nodiscard]] auto trace_uniform_universe(const FilterConfig& base, std::uint64_t universe,
                                          std::uint64_t length, std::size_t runs) -> UniformTrace;

void write_trace_csv(const UniformTrace& trace, std::ostream& out);

} // namespace bfdedup
