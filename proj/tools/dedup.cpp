// dedup: experiment driver for the streaming duplicate-detection filters.
//
//   dedup run      stream elements through the oracle and one or all filters
//   dedup theory   iterate an analytical X recurrence and print (m, X, Y, FPR, FNR)
//   dedup trace    Monte-Carlo X_m and mean load on uniform-universe streams
//   dedup choose-k k from a target FPR
//   dedup compare  join reports that share a checkpoint grid
//
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "bfdedup/experiment.hpp"
#include "bfdedup/theory.hpp"

namespace {

using namespace bfdedup;

constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

auto trim(std::string s) -> std::string {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Expands `--config FILE` (key=value lines, '#' comments) into ordinary flags
// placed ahead of the command-line ones. Keys already given as flags are
// skipped, so flags win.
auto expand_config(std::vector<std::string> args) -> std::vector<std::string> {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (config_path.empty()) {
    return args;
  }
  std::ifstream in(config_path);
  if (!in) {
    throw UsageError("cannot open config file '" + config_path + "'");
  }
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("{}:{}: expected key=value", config_path, line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") {
      throw UsageError(fmt::format("{}:{}: config files cannot nest", config_path, line_no));
    }
    if (!given(key)) {
      extra.push_back("--" + key);
      extra.push_back(value);
    }
  }
  // args[0] is the subcommand name.
  if (!args.empty()) {
    args.insert(args.begin() + 1, extra.begin(), extra.end());
  }
  return args;
}

auto open_output(const std::string& path, std::ofstream& file) -> std::ostream& {
  if (path.empty() || path == "-") {
    return std::cout;
  }
  file.open(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw std::runtime_error("cannot open output '" + path + "'");
  }
  return file;
}

struct RunOptions {
  std::string algo = "bsbf";
  std::uint64_t memory_bits = 0;
  std::size_t k = 2;
  double fpr_threshold = 0.1;
  double pstar = 0.03;
  std::string mode = "controlled";
  std::uint64_t n = 0;
  std::uint64_t universe = 0;
  double distinct = 1.0;
  std::string input;
  std::uint64_t seed = 0;
  std::uint64_t report_interval = 0;
  std::uint64_t windowed = 0;
  std::string out;
  std::string oracle = "digest";
  std::optional<std::size_t> sbf_probes;
  std::optional<std::size_t> sbf_decrements;
  bool write_meta = true;
  std::string config;
};

auto build_experiment(const RunOptions& o) -> ExperimentConfig {
  ExperimentConfig config;
  if (o.algo == "all") {
    config.algorithms.assign(std::begin(kAllAlgorithms), std::end(kAllAlgorithms));
  } else {
    config.algorithms = {parse_algorithm(o.algo)};
  }
  config.filter.memory_bits = o.memory_bits;
  config.filter.k = o.k;
  config.filter.fpr_threshold = o.fpr_threshold;
  config.filter.pstar = o.pstar;
  config.filter.seed = o.seed;
  config.filter.sbf_probes = o.sbf_probes;
  config.filter.sbf_decrements = o.sbf_decrements;
  config.stream.mode = parse_stream_mode(o.mode);
  config.stream.length = o.n;
  config.stream.universe = o.universe;
  config.stream.distinct_fraction = o.distinct;
  config.stream.path = o.input;
  config.stream.seed = o.seed;
  config.report_interval = o.windowed > 0 && o.report_interval == 0 ? o.windowed : o.report_interval;
  config.window = o.windowed;
  if (o.oracle == "exact") {
    config.oracle = OracleMode::exact_bytes;
  } else if (o.oracle != "digest") {
    throw std::invalid_argument("--oracle must be 'digest' or 'exact'");
  }
  config.validate();
  return config;
}

auto do_run(const RunOptions& o) -> int {
  ExperimentConfig config;
  try {
    config = build_experiment(o);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const bool many = config.algorithms.size() > 1;
  if (many && (o.out.empty() || o.out == "-")) {
    throw UsageError("--algo all needs --out (one file per algorithm)");
  }
  for (Algorithm algorithm : config.algorithms) {
    const std::string path = many ? per_algorithm_path(o.out, algorithm).string() : o.out;
    const ExperimentReport report = run_experiment(config, algorithm);
    std::ofstream file;
    std::ostream& out = open_output(path, file);
    write_report_csv(report, out);
    out.flush();
    if (!out) {
      throw std::runtime_error("write failed for '" + (path.empty() ? "stdout" : path) + "'");
    }
    if (o.write_meta && !path.empty() && path != "-") {
      std::ofstream meta(path + ".meta.csv", std::ios::trunc);
      write_report_metadata(config, algorithm, meta);
    }
    const RatePercent r = rates(report.summary.counters);
    if (!r.fpr_defined) {
      std::cerr << "note: " << to_string(algorithm) << ": no distinct elements, FPR reported as 0\n";
    }
    if (!r.fnr_defined) {
      std::cerr << "note: " << to_string(algorithm) << ": no duplicate elements, FNR reported as 0\n";
    }
  }
  return 0;
}

struct TheoryOptions {
  std::string algo = "bsbf";
  std::size_t k = 2;
  std::size_t s = 0;
  std::uint64_t universe = 1;
  double pstar = 0.03;
  std::size_t m_max = 0;
  std::string load_trajectory;
  std::string out;
  std::string config;
};

auto do_theory(const TheoryOptions& o) -> int {
  TheoryRequest request;
  try {
    request.algorithm = parse_algorithm(o.algo);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  request.k = o.k;
  request.s = o.s;
  request.universe = o.universe;
  request.pstar = o.pstar;
  request.m_max = o.m_max;
  if (request.algorithm == Algorithm::rlbsbf) {
    if (o.load_trajectory.empty()) {
      throw UsageError("theory --algo rlbsbf needs --load-trajectory FILE");
    }
    request.load_trajectory = read_load_trajectory(o.load_trajectory);
  }
  std::ofstream file;
  std::ostream& out = open_output(o.out, file);
  try {
    write_theory_csv(request, out);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return 0;
}

struct TraceOptions {
  std::string algo = "rlbsbf";
  std::size_t k = 2;
  std::size_t s = 0;
  std::uint64_t universe = 0;
  std::uint64_t n = 0;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  double pstar = 0.03;
  std::string out;
  std::string config;
};

auto do_trace(const TraceOptions& o) -> int {
  FilterConfig base;
  try {
    base.algorithm = parse_algorithm(o.algo);
    base.k = o.k;
    base.memory_bits = static_cast<std::uint64_t>(o.k) * o.s;
    base.pstar = o.pstar;
    base.seed = o.seed;
    base.validate();
    if (o.universe == 0) {
      throw std::invalid_argument("--universe must be at least 1");
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const UniformTrace trace = trace_uniform_universe(base, o.universe, o.n, o.runs);
  std::ofstream file;
  write_trace_csv(trace, open_output(o.out, file));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming duplicate detection with deleting Bloom filters"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "Run filters over a stream and write checkpoint CSV");
  run->add_option("--algo", run_opts.algo, "rsbf|bsbf|bsbfsd|rlbsbf|stdbf|sbf|all")
      ->capture_default_str();
  run->add_option("--memory-bits", run_opts.memory_bits, "Total filter memory M in bits")
      ->required();
  run->add_option("--k", run_opts.k, "Number of partitions")->capture_default_str();
  run->add_option("--fpr-threshold", run_opts.fpr_threshold, "Target FPR (SBF sizing)")
      ->capture_default_str();
  run->add_option("--pstar", run_opts.pstar, "RSBF insertion-probability floor")
      ->capture_default_str();
  run->add_option("--mode", run_opts.mode, "uniform|controlled|file")->capture_default_str();
  run->add_option("--n", run_opts.n, "Stream length (synthetic modes)");
  run->add_option("--universe", run_opts.universe, "Universe size (uniform mode)");
  run->add_option("--distinct", run_opts.distinct, "Distinct fraction (controlled mode)")
      ->capture_default_str();
  run->add_option("--input", run_opts.input, "Newline-delimited records (file mode)");
  run->add_option("--seed", run_opts.seed, "Seed for filter and stream")->envname("DEDUP_SEED");
  run->add_option("--report-interval", run_opts.report_interval,
                  "Checkpoint every R elements (0: summary only)");
  run->add_option("--windowed", run_opts.windowed,
                  "Checkpoint rows cover the trailing R elements instead of the whole prefix");
  run->add_option("--out", run_opts.out, "Output CSV (prefix for --algo all)");
  run->add_option("--oracle", run_opts.oracle, "digest|exact")->capture_default_str();
  run->add_option("--sbf-probes", run_opts.sbf_probes, "Override SBF probe count K");
  run->add_option("--sbf-decrements", run_opts.sbf_decrements, "Override SBF decrement count P");
  run->add_flag("!--no-meta", run_opts.write_meta, "Skip the <out>.meta.csv sidecar");
  run->add_option("--config", run_opts.config, "key=value file; flags override it");

  TheoryOptions theory_opts;
  auto* theory = app.add_subcommand("theory", "Iterate an X recurrence, CSV m,X,Y,FPR,FNR");
  theory->add_option("--algo", theory_opts.algo, "rsbf|bsbf|bsbfsd|rlbsbf")->capture_default_str();
  theory->add_option("--k", theory_opts.k)->capture_default_str();
  theory->add_option("--s", theory_opts.s, "Bits per partition")->required();
  theory->add_option("--universe", theory_opts.universe, "Universe size U")->capture_default_str();
  theory->add_option("--pstar", theory_opts.pstar)->capture_default_str();
  theory->add_option("--m-max", theory_opts.m_max, "Horizon")->required();
  theory->add_option("--load-trajectory", theory_opts.load_trajectory,
                     "Per-position expected load (rlbsbf)");
  theory->add_option("--out", theory_opts.out, "Output CSV (default stdout)");
  theory->add_option("--config", theory_opts.config, "key=value file; flags override it");

  TraceOptions trace_opts;
  auto* trace = app.add_subcommand("trace", "Monte-Carlo X_m and mean load on uniform streams");
  trace->add_option("--algo", trace_opts.algo)->capture_default_str();
  trace->add_option("--k", trace_opts.k)->capture_default_str();
  trace->add_option("--s", trace_opts.s, "Bits per partition")->required();
  trace->add_option("--universe", trace_opts.universe)->required();
  trace->add_option("--n", trace_opts.n, "Stream length")->required();
  trace->add_option("--runs", trace_opts.runs)->capture_default_str();
  trace->add_option("--seed", trace_opts.seed)->envname("DEDUP_SEED");
  trace->add_option("--pstar", trace_opts.pstar)->capture_default_str();
  trace->add_option("--out", trace_opts.out, "Output CSV (default stdout)");
  trace->add_option("--config", trace_opts.config, "key=value file; flags override it");

  double choose_fpr = 0.1;
  auto* choose = app.add_subcommand("choose-k", "k from a target FPR");
  choose->add_option("--fpr-threshold", choose_fpr)->capture_default_str();

  std::vector<std::string> compare_inputs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Join reports sharing a checkpoint grid");
  compare->add_option("reports", compare_inputs, "Report CSV files")->required();
  compare->add_option("--out", compare_out, "Output CSV (default stdout)");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*run) {
      return do_run(run_opts);
    }
    if (*theory) {
      return do_theory(theory_opts);
    }
    if (*trace) {
      return do_trace(trace_opts);
    }
    if (*choose) {
      if (!(choose_fpr > 0.0 && choose_fpr < 1.0)) {
        throw UsageError("--fpr-threshold must lie in (0, 1)");
      }
      const theory::KChoice choice = theory::choose_k(choose_fpr);
      std::cout << fmt::format("fpr_threshold,k_formula,k\n{:.6g},{:.6g},{}\n", choose_fpr,
                               choice.k_formula, choice.k);
      return 0;
    }
    if (*compare) {
      std::vector<std::filesystem::path> paths(compare_inputs.begin(), compare_inputs.end());
      std::ofstream file;
      std::ostream& out = open_output(compare_out, file);
      try {
        compare_reports(paths, out);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
