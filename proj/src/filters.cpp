#include "bfdedup/filters.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bfdedup {

namespace {

// Filters draw from a generator that is decorrelated from the hash seeds.
constexpr std::uint64_t kRngSalt = 0x5DEECE66DULL;

} // namespace

auto to_string(Algorithm algorithm) -> std::string_view {
  switch (algorithm) {
  case Algorithm::rsbf:
    return "rsbf";
  case Algorithm::bsbf:
    return "bsbf";
  case Algorithm::bsbfsd:
    return "bsbfsd";
  case Algorithm::rlbsbf:
    return "rlbsbf";
  case Algorithm::stdbf:
    return "stdbf";
  case Algorithm::sbf:
    return "sbf";
  }
  return "unknown";
}

auto to_string(Verdict verdict) -> std::string_view {
  return verdict == Verdict::duplicate ? "DUPLICATE" : "DISTINCT";
}

auto parse_algorithm(std::string_view name) -> Algorithm {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Algorithm algorithm : kAllAlgorithms) {
    if (to_string(algorithm) == lower) {
      return algorithm;
    }
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

auto derive_sbf_params(std::uint64_t memory_bits, double fpr_threshold, unsigned counter_bits)
    -> SbfParams {
  if (counter_bits == 0 || counter_bits > 8) {
    throw std::invalid_argument("SBF counter width must be in [1, 8] bits");
  }
  if (!(fpr_threshold > 0.0 && fpr_threshold < 1.0)) {
    throw std::invalid_argument("FPR threshold must lie in (0, 1)");
  }
  SbfParams params;
  params.counter_bits = counter_bits;
  params.cells = static_cast<std::size_t>(memory_bits / counter_bits);
  if (params.cells == 0) {
    throw std::invalid_argument("memory budget too small for one SBF cell");
  }
  const double m = static_cast<double>(params.cells);
  const double max_value = static_cast<double>(params.max_value());

  double best_p = std::numeric_limits<double>::infinity();
  for (std::size_t probes = 1; probes <= 16; ++probes) {
    const double K = static_cast<double>(probes);
    const double c = 1.0 / K - 1.0 / m;
    if (!(c > 0.0)) {
      break;
    }
    const double zero_prob = 1.0 - std::pow(fpr_threshold, 1.0 / K);
    const double denom = c * (std::pow(zero_prob, -1.0 / max_value) - 1.0);
    if (!(denom > 0.0)) {
      continue;
    }
    const double p = 1.0 / denom;
    if (p < best_p) {
      best_p = p;
      params.probes = probes;
    }
  }
  if (!std::isfinite(best_p)) {
    throw std::invalid_argument("no feasible SBF setting for this budget");
  }
  params.decrements = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(best_p)));
  return params;
}

void FilterConfig::validate() const {
  if (k == 0) {
    throw std::invalid_argument("k must be at least 1");
  }
  if (memory_bits / k == 0) {
    throw std::invalid_argument("memory budget gives s = floor(M/k) = 0");
  }
  if (!(fpr_threshold > 0.0 && fpr_threshold < 1.0)) {
    throw std::invalid_argument("FPR threshold must lie in (0, 1)");
  }
  if (!(pstar > 0.0 && pstar <= 1.0)) {
    throw std::invalid_argument("p* must lie in (0, 1]");
  }
  if (algorithm == Algorithm::sbf) {
    (void)sbf_params();
  }
}

auto FilterConfig::sbf_params() const -> SbfParams {
  SbfParams params = derive_sbf_params(memory_bits, fpr_threshold);
  if (sbf_probes) {
    if (*sbf_probes == 0) {
      throw std::invalid_argument("SBF needs at least one probe");
    }
    params.probes = *sbf_probes;
  }
  if (sbf_decrements) {
    params.decrements = *sbf_decrements;
  }
  return params;
}

auto rsbf_phase3_start(std::size_t s, double pstar) -> std::uint64_t {
  const double sd = static_cast<double>(s);
  auto p = static_cast<std::uint64_t>(std::ceil(sd / pstar));
  p = std::max<std::uint64_t>(p, 1);
  while (p > 1 && sd / static_cast<double>(p - 1) <= pstar) {
    --p;
  }
  while (sd / static_cast<double>(p) > pstar) {
    ++p;
  }
  return p;
}

// ---------------------------------------------------------------------------

BitFilter::BitFilter(const FilterConfig& config)
    : bits_(config.k, config.bits_per_partition()), rng_(mix64(config.seed ^ kRngSalt)),
      hash_(config.k, config.bits_per_partition(), config.seed), probe_(config.k) {}

auto BitFilter::process(std::string_view element) -> Verdict {
  hash_.map(element, probe_);
  bool all_set = true;
  for (std::size_t i = 0; i < probe_.size(); ++i) {
    if (!bits_.test(i, probe_[i])) {
      all_set = false;
      break;
    }
  }
  const Verdict verdict = all_set ? Verdict::duplicate : Verdict::distinct;
  ++iter_;
  update(probe_, verdict, iter_);
  return verdict;
}

auto BitFilter::query(std::string_view element) const -> Verdict {
  std::vector<std::size_t> probe(k());
  hash_.map(element, probe);
  for (std::size_t i = 0; i < probe.size(); ++i) {
    if (!bits_.test(i, probe[i])) {
      return Verdict::distinct;
    }
  }
  return Verdict::duplicate;
}

auto BitFilter::loads() const -> std::vector<std::size_t> {
  std::vector<std::size_t> out(bits_.partitions());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = bits_.load(i);
  }
  return out;
}

void BitFilter::set_all(std::span<const std::size_t> probe) noexcept {
  for (std::size_t i = 0; i < probe.size(); ++i) {
    bits_.set_bit(i, probe[i]);
  }
}

RsbfFilter::RsbfFilter(const FilterConfig& config)
    : BitFilter(config), phase3_start_(rsbf_phase3_start(config.bits_per_partition(), config.pstar)) {}

auto RsbfFilter::phase(std::uint64_t iter) const noexcept -> int {
  if (iter <= s()) {
    return 1;
  }
  return iter >= phase3_start_ ? 3 : 2;
}

void RsbfFilter::update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t iter) {
  switch (phase(iter)) {
  case 1:
    set_all(probe);
    return;
  case 2:
    if (verdict == Verdict::duplicate) {
      return;
    }
    if (!rng_.bernoulli(static_cast<double>(s()) / static_cast<double>(iter))) {
      return;
    }
    set_all(probe);
    for (std::size_t i = 0; i < k(); ++i) {
      bits_.reset_bit(i, bits_.sample_uniform_position(rng_));
    }
    return;
  default:
    if (verdict == Verdict::duplicate) {
      return;
    }
    for (std::size_t i = 0; i < probe.size(); ++i) {
      if (bits_.test(i, probe[i])) {
        continue;
      }
      // An empty partition has nothing to pair with; the set still happens.
      if (bits_.load(i) > 0) {
        bits_.reset_bit(i, bits_.sample_set_position(i, rng_));
      }
      bits_.set_bit(i, probe[i]);
    }
    return;
  }
}

void BsbfFilter::update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t) {
  if (verdict == Verdict::duplicate) {
    return;
  }
  for (std::size_t i = 0; i < k(); ++i) {
    bits_.reset_bit(i, bits_.sample_uniform_position(rng_));
  }
  set_all(probe);
}

void BsbfsdFilter::update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t) {
  if (verdict == Verdict::duplicate) {
    return;
  }
  const auto partition = static_cast<std::size_t>(rng_.below(k()));
  bits_.reset_bit(partition, bits_.sample_uniform_position(rng_));
  set_all(probe);
}

void RlbsbfFilter::update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t) {
  if (verdict == Verdict::duplicate) {
    return;
  }
  const double s_bits = static_cast<double>(s());
  for (std::size_t i = 0; i < k(); ++i) {
    const double reset_probability = static_cast<double>(bits_.load(i)) / s_bits;
    const std::size_t position = bits_.sample_uniform_position(rng_);
    if (rng_.bernoulli(reset_probability)) {
      bits_.reset_bit(i, position);
    }
  }
  set_all(probe);
}

void StandardBloomFilter::update(std::span<const std::size_t> probe, Verdict, std::uint64_t) {
  set_all(probe);
}

// ---------------------------------------------------------------------------

StableBloomFilter::StableBloomFilter(const FilterConfig& config)
    : StableBloomFilter(config.sbf_params(), config.seed) {}

StableBloomFilter::StableBloomFilter(const SbfParams& params, std::uint64_t seed)
    : params_(params), hash_(params.probes, params.cells, seed), rng_(mix64(seed ^ kRngSalt)),
      cells_(params.cells, 0), probe_(params.probes) {
  if (params.counter_bits == 0 || params.counter_bits > 8) {
    throw std::invalid_argument("SBF counter width must be in [1, 8] bits");
  }
}

auto StableBloomFilter::process(std::string_view element) -> Verdict {
  hash_.map(element, probe_);
  const bool all_nonzero =
      std::all_of(probe_.begin(), probe_.end(), [&](std::size_t c) { return cells_[c] != 0; });
  ++iter_;

  for (std::size_t d = 0; d < params_.decrements; ++d) {
    auto& cell = cells_[static_cast<std::size_t>(rng_.below(cells_.size()))];
    if (cell != 0 && --cell == 0) {
      --nonzero_;
    }
  }
  const auto max_value = static_cast<std::uint8_t>(params_.max_value());
  for (std::size_t c : probe_) {
    if (cells_[c] == 0) {
      ++nonzero_;
    }
    cells_[c] = max_value;
  }
  return all_nonzero ? Verdict::duplicate : Verdict::distinct;
}

auto StableBloomFilter::query(std::string_view element) const -> Verdict {
  std::vector<std::size_t> probe(params_.probes);
  hash_.map(element, probe);
  const bool all_nonzero =
      std::all_of(probe.begin(), probe.end(), [&](std::size_t c) { return cells_[c] != 0; });
  return all_nonzero ? Verdict::duplicate : Verdict::distinct;
}

auto make_filter(const FilterConfig& config) -> std::unique_ptr<DedupFilter> {
  config.validate();
  switch (config.algorithm) {
  case Algorithm::rsbf:
    return std::make_unique<RsbfFilter>(config);
  case Algorithm::bsbf:
    return std::make_unique<BsbfFilter>(config);
  case Algorithm::bsbfsd:
    return std::make_unique<BsbfsdFilter>(config);
  case Algorithm::rlbsbf:
    return std::make_unique<RlbsbfFilter>(config);
  case Algorithm::stdbf:
    return std::make_unique<StandardBloomFilter>(config);
  case Algorithm::sbf:
    return std::make_unique<StableBloomFilter>(config);
  }
  throw std::invalid_argument("unsupported algorithm");
}

} // namespace bfdedup
