#include "bfdedup/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bfdedup/theory.hpp"

namespace bfdedup {

namespace {

enum Outcome : std::uint8_t { kFp, kFn, kTpDup, kTnDis };

auto classify(Verdict truth, Verdict verdict) noexcept -> Outcome {
  if (truth == Verdict::distinct) {
    return verdict == Verdict::duplicate ? kFp : kTnDis;
  }
  return verdict == Verdict::distinct ? kFn : kTpDup;
}

void bump(Counters& c, Outcome o, bool add) noexcept {
  std::uint64_t& slot = o == kFp ? c.fp : o == kFn ? c.fn : o == kTpDup ? c.tp_dup : c.tn_dis;
  add ? ++slot : --slot;
}

// Trailing-window counters over the last `size` outcomes.
class OutcomeWindow {
public:
  explicit OutcomeWindow(std::uint64_t size) : ring_(size) {}

  void push(Outcome o) {
    if (filled_ == ring_.size()) {
      bump(counters_, ring_[head_], false);
    } else {
      ++filled_;
    }
    ring_[head_] = o;
    head_ = (head_ + 1) % ring_.size();
    bump(counters_, o, true);
  }
  [[nodiscard]] auto counters() const noexcept -> const Counters& { return counters_; }

private:
  std::vector<Outcome> ring_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  Counters counters_;
};

auto split_csv(const std::string& line) -> std::vector<std::string> {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

struct ParsedReport {
  std::filesystem::path path;
  std::string algorithm;
  std::vector<std::string> grid;              // m column, summary row excluded
  std::vector<std::vector<std::string>> rows; // all data rows, in order
};

auto parse_report(const std::filesystem::path& path) -> ParsedReport {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open report '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw std::invalid_argument("'" + path.string() + "' is not a report (header mismatch)");
  }
  ParsedReport report{.path = path};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    auto fields = split_csv(line);
    if (fields.size() != 10) {
      throw std::invalid_argument(fmt::format("{}:{}: expected 10 fields, found {}", path.string(),
                                              line_no, fields.size()));
    }
    if (report.algorithm.empty()) {
      report.algorithm = fields[1];
    }
    if (fields[0] != "summary") {
      report.grid.push_back(fields[0]);
    }
    report.rows.push_back(std::move(fields));
  }
  if (in.bad()) {
    throw std::runtime_error(fmt::format("read error in '{}' after line {}", path.string(), line_no));
  }
  return report;
}

} // namespace

void ExperimentConfig::validate() const {
  if (algorithms.empty()) {
    throw std::invalid_argument("no algorithm selected");
  }
  for (Algorithm algorithm : algorithms) {
    FilterConfig f = filter;
    f.algorithm = algorithm;
    f.validate();
  }
  stream.validate();
  if (window > 0 && report_interval == 0) {
    throw std::invalid_argument("a window needs a report interval");
  }
}

auto run_experiment(const ExperimentConfig& config, Algorithm algorithm) -> ExperimentReport {
  config.validate();
  FilterConfig filter_config = config.filter;
  filter_config.algorithm = algorithm;
  auto filter = make_filter(filter_config);
  auto stream = generate(config.stream);
  ExactOracle oracle(config.oracle);

  ExperimentReport report{.algorithm = algorithm};
  Counters total;
  std::optional<OutcomeWindow> window;
  if (config.window > 0) {
    window.emplace(config.window);
  }
  auto row_for = [&](const Counters& counters, bool summary) {
    return ReportRow{.m = total.processed(),
                     .summary = summary,
                     .algorithm = algorithm,
                     .counters = counters,
                     .load_fraction = load_fraction(*filter),
                     .seed = filter_config.seed};
  };

  while (auto element = stream->next()) {
    const Verdict truth = oracle.observe(*element);
    const Verdict verdict = filter->process(*element);
    const Outcome outcome = classify(truth, verdict);
    bump(total, outcome, true);
    if (window) {
      window->push(outcome);
    }
    if (config.report_interval > 0 && total.processed() % config.report_interval == 0) {
      report.checkpoints.push_back(row_for(window ? window->counters() : total, false));
    }
  }
  report.summary = row_for(total, true);
  return report;
}

auto format_row(const ReportRow& row) -> std::string {
  const RatePercent r = rates(row.counters);
  return fmt::format("{},{},{},{},{},{},{:.6g},{:.6g},{:.6g},{}",
                     row.summary ? std::string("summary") : std::to_string(row.m),
                     to_string(row.algorithm), row.counters.fp, row.counters.fn,
                     row.counters.tp_dup, row.counters.tn_dis, r.fpr_pct, r.fnr_pct,
                     row.load_fraction, row.seed);
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << kReportHeader << '\n';
  for (const ReportRow& row : report.checkpoints) {
    out << format_row(row) << '\n';
  }
  out << format_row(report.summary) << '\n';
}

void write_report_metadata(const ExperimentConfig& config, Algorithm algorithm, std::ostream& out) {
  FilterConfig f = config.filter;
  f.algorithm = algorithm;
  out << "key,value\n";
  out << "algorithm," << to_string(algorithm) << '\n';
  out << "memory_bits," << f.memory_bits << '\n';
  if (algorithm == Algorithm::sbf) {
    const SbfParams sbf = f.sbf_params();
    out << "sbf_cells," << sbf.cells << '\n';
    out << "sbf_counter_bits," << sbf.counter_bits << '\n';
    out << "sbf_max," << sbf.max_value() << '\n';
    out << "sbf_probes," << sbf.probes << '\n';
    out << "sbf_decrements," << sbf.decrements << '\n';
    out << "sbf_param_rule,min decrements meeting stable FPR_t over K in [1;16]\n";
  } else {
    out << "k," << f.k << '\n';
    out << "s," << f.bits_per_partition() << '\n';
  }
  if (algorithm == Algorithm::rsbf) {
    out << "pstar," << fmt::format("{:.6g}", f.pstar) << '\n';
    out << "phase3_start," << rsbf_phase3_start(f.bits_per_partition(), f.pstar) << '\n';
  }
  out << "fpr_threshold," << fmt::format("{:.6g}", f.fpr_threshold) << '\n';
  out << "seed," << f.seed << '\n';
  out << "hash," << kDigestName << " double hashing\n";
  out << "stream_mode," << to_string(config.stream.mode) << '\n';
  switch (config.stream.mode) {
  case StreamMode::uniform_universe:
    out << "length," << config.stream.length << '\n';
    out << "universe," << config.stream.universe << '\n';
    break;
  case StreamMode::controlled_distinct:
    out << "length," << config.stream.length << '\n';
    out << "distinct_fraction," << fmt::format("{:.6g}", config.stream.distinct_fraction) << '\n';
    break;
  case StreamMode::file:
    out << "path," << config.stream.path.string() << '\n';
    break;
  }
  out << "stream_seed," << config.stream.seed << '\n';
  out << "oracle," << (config.oracle == OracleMode::digest ? "digest" : "exact") << '\n';
  out << "fpr_denominator,actually distinct elements\n";
  out << "fnr_denominator,actually duplicate elements\n";
  out << "report_interval," << config.report_interval << '\n';
  out << "rows," << (config.window > 0 ? "windowed" : "cumulative") << '\n';
  if (config.window > 0) {
    out << "window," << config.window << '\n';
  }
}

auto per_algorithm_path(const std::filesystem::path& base, Algorithm algorithm)
    -> std::filesystem::path {
  std::filesystem::path out = base;
  out.replace_filename(base.stem().string() + "_" + std::string(to_string(algorithm)) +
                       base.extension().string());
  return out;
}

void compare_reports(const std::vector<std::filesystem::path>& reports, std::ostream& out) {
  if (reports.empty()) {
    throw std::invalid_argument("compare needs at least one report");
  }
  std::vector<ParsedReport> parsed;
  parsed.reserve(reports.size());
  for (const auto& path : reports) {
    parsed.push_back(parse_report(path));
  }
  std::vector<std::string> offenders;
  for (std::size_t i = 1; i < parsed.size(); ++i) {
    if (parsed[i].grid != parsed[0].grid || parsed[i].rows.size() != parsed[0].rows.size()) {
      offenders.push_back(parsed[i].path.string());
    }
  }
  if (!offenders.empty()) {
    std::string list;
    for (const auto& o : offenders) {
      list += (list.empty() ? "" : ", ") + o;
    }
    throw std::invalid_argument("checkpoint grid differs from '" + parsed[0].path.string() +
                                "' in: " + list);
  }

  std::map<std::string, int> seen;
  out << 'm';
  for (const auto& report : parsed) {
    const int n = ++seen[report.algorithm];
    const std::string label = n == 1 ? report.algorithm : fmt::format("{}_{}", report.algorithm, n);
    for (const char* column :
         {"fp", "fn", "tp_dup", "tn_dis", "fpr_pct", "fnr_pct", "load_fraction"}) {
      out << ',' << label << '_' << column;
    }
  }
  out << '\n';
  for (std::size_t r = 0; r < parsed[0].rows.size(); ++r) {
    out << parsed[0].rows[r][0];
    for (const auto& report : parsed) {
      for (std::size_t c = 2; c <= 8; ++c) {
        out << ',' << report.rows[r][c];
      }
    }
    out << '\n';
  }
}

void write_theory_csv(const TheoryRequest& request, std::ostream& out) {
  theory::TheoryState state;
  switch (request.algorithm) {
  case Algorithm::bsbf:
    state = theory::iterate_bsbf(request.k, request.s, request.m_max);
    break;
  case Algorithm::bsbfsd:
    state = theory::iterate_bsbfsd(request.k, request.s, request.m_max);
    break;
  case Algorithm::rsbf:
    state = theory::iterate_rsbf(request.k, request.s, request.pstar, request.m_max);
    break;
  case Algorithm::rlbsbf:
    if (request.load_trajectory.empty()) {
      throw std::invalid_argument("rlbsbf theory needs a load trajectory");
    }
    state = theory::iterate_rlbsbf(request.k, request.s, request.load_trajectory, request.m_max);
    break;
  default:
    throw std::invalid_argument(
        fmt::format("no recurrence for algorithm '{}'", to_string(request.algorithm)));
  }
  out << kTheoryHeader << '\n';
  for (std::size_t m = 1; m <= state.horizon(); ++m) {
    const double y = theory::prob_distinct(request.universe, m - 1);
    const theory::Rates r = theory::rates_from_xy(state.x(m), y);
    out << fmt::format("{},{:.10g},{:.10g},{:.10g},{:.10g}\n", m, state.x(m), y, r.fpr, r.fnr);
  }
}

auto read_load_trajectory(const std::filesystem::path& path) -> std::vector<double> {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open load trajectory '" + path.string() + "'");
  }
  std::vector<double> values;
  std::string line;
  std::optional<std::size_t> column;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    if (line_no == 1 && line.find_first_not_of("0123456789.eE+-") != std::string::npos) {
      const auto header = split_csv(line);
      const auto it = std::find(header.begin(), header.end(), "mean_load");
      if (it == header.end()) {
        throw std::invalid_argument("'" + path.string() + "' has no mean_load column");
      }
      column = static_cast<std::size_t>(it - header.begin());
      continue;
    }
    const std::string field = column ? split_csv(line).at(*column) : line;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(field, &used));
    } catch (const std::exception&) {
      throw std::invalid_argument(fmt::format("{}:{}: not a number", path.string(), line_no));
    }
  }
  return values;
}

auto trace_uniform_universe(const FilterConfig& base, std::uint64_t universe, std::uint64_t length,
                            std::size_t runs) -> UniformTrace {
  if (runs == 0) {
    throw std::invalid_argument("trace needs at least one run");
  }
  UniformTrace trace;
  trace.duplicate_fraction.assign(length, 0.0);
  trace.mean_load.assign(length, 0.0);
  for (std::size_t run = 0; run < runs; ++run) {
    FilterConfig config = base;
    config.seed = base.seed + run;
    auto filter = make_filter(config);
    const double partitions = static_cast<double>(filter->loads().size());
    auto stream = generate(StreamSpec{.mode = StreamMode::uniform_universe,
                                      .length = length,
                                      .universe = universe,
                                      .seed = config.seed});
    std::uint64_t m = 0;
    while (auto element = stream->next()) {
      trace.mean_load[m] += static_cast<double>(filter->occupied_cells()) / partitions;
      if (filter->process(*element) == Verdict::duplicate) {
        trace.duplicate_fraction[m] += 1.0;
      }
      ++m;
    }
  }
  const double scale = 1.0 / static_cast<double>(runs);
  for (std::uint64_t m = 0; m < length; ++m) {
    trace.duplicate_fraction[m] *= scale;
    trace.mean_load[m] *= scale;
  }
  return trace;
}

void write_trace_csv(const UniformTrace& trace, std::ostream& out) {
  out << "m,x_monte_carlo,mean_load\n";
  for (std::size_t i = 0; i < trace.mean_load.size(); ++i) {
    out << fmt::format("{},{:.10g},{:.10g}\n", i + 1, trace.duplicate_fraction[i],
                       trace.mean_load[i]);
  }
}

} // namespace bfdedup
