#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bfdedup/hash_family.hpp"
#include "bfdedup/partitioned_bit_array.hpp"
#include "bfdedup/rng.hpp"

namespace bfdedup {

enum class Verdict : std::uint8_t { distinct, duplicate };

enum class Algorithm : std::uint8_t { rsbf, bsbf, bsbfsd, rlbsbf, stdbf, sbf };

inline constexpr Algorithm kAllAlgorithms[] = {Algorithm::sbf,    Algorithm::rsbf,
                                               Algorithm::bsbf,   Algorithm::bsbfsd,
                                               Algorithm::rlbsbf, Algorithm::stdbf};

[[nodiscard]] auto to_string(Algorithm algorithm) -> std::string_view;
[[nodiscard]] auto to_string(Verdict verdict) -> std::string_view;
// Case-insensitive. Throws std::invalid_argument on unknown names.
[[nodiscard]] auto parse_algorithm(std::string_view name) -> Algorithm;

// Stable Bloom filter comparator settings: `cells` counters of
// `counter_bits` bits each, `probes` hashed cells per element and
// `decrements` random cells decremented per element.
struct SbfParams {
  std::size_t cells = 0;
  unsigned counter_bits = 3;
  std::size_t probes = 1;
  std::size_t decrements = 0;

  [[nodiscard]] auto max_value() const noexcept -> unsigned { return (1U << counter_bits) - 1U; }
};

// Derives SBF settings from a bit budget and a target stable false positive
// rate. Uses the stable-state zero-cell probability of the original SBF
// analysis,
//   P(cell == 0) = (1 / (1 + 1 / (P * (1/K - 1/m))))^Max,
// solves FPR_t = (1 - P(cell == 0))^K for P at each K in [1, 16], and keeps
// the K needing the fewest decrements (fewest evictions => fewest false
// negatives). P is rounded to the nearest integer, minimum 1.
[[nodiscard]] auto derive_sbf_params(std::uint64_t memory_bits, double fpr_threshold,
                                     unsigned counter_bits = 3) -> SbfParams;

struct FilterConfig {
  std::uint64_t memory_bits = 0;
  std::size_t k = 2;
  double fpr_threshold = 0.1;
  double pstar = 0.03;
  Algorithm algorithm = Algorithm::bsbf;
  std::uint64_t seed = 0;
  // SBF only; unset fields come from derive_sbf_params().
  std::optional<std::size_t> sbf_probes;
  std::optional<std::size_t> sbf_decrements;

  [[nodiscard]] auto bits_per_partition() const noexcept -> std::size_t {
    return k == 0 ? 0 : static_cast<std::size_t>(memory_bits / k);
  }
  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;
  [[nodiscard]] auto sbf_params() const -> SbfParams;
};

// First stream position (1-based) at which s / iter <= p*. Starts from
// ceil(s / p*) and is adjusted so that `iter >= p` and the floating-point
// test `s / iter <= p*` agree exactly.
[[nodiscard]] auto rsbf_phase3_start(std::size_t s, double pstar) -> std::uint64_t;

// Streaming duplicate detector. process() probes before it mutates, so the
// verdict for an element never reflects that element's own update.
class DedupFilter {
public:
  virtual ~DedupFilter() = default;

  virtual auto process(std::string_view element) -> Verdict = 0;
  // The verdict process() would return, without updating anything.
  [[nodiscard]] virtual auto query(std::string_view element) const -> Verdict = 0;

  [[nodiscard]] virtual auto algorithm() const noexcept -> Algorithm = 0;
  // Number of set bits (nonzero counters for SBF) over all partitions.
  [[nodiscard]] virtual auto occupied_cells() const noexcept -> std::size_t = 0;
  [[nodiscard]] virtual auto total_cells() const noexcept -> std::size_t = 0;
  // Per-partition occupied cells.
  [[nodiscard]] virtual auto loads() const -> std::vector<std::size_t> = 0;
  // Number of elements processed so far.
  [[nodiscard]] virtual auto processed() const noexcept -> std::uint64_t = 0;
};

// Shared skeleton for the bit-array algorithms: hash, probe, then update().
class BitFilter : public DedupFilter {
public:
  auto process(std::string_view element) -> Verdict final;
  [[nodiscard]] auto query(std::string_view element) const -> Verdict final;

  [[nodiscard]] auto occupied_cells() const noexcept -> std::size_t final {
    return bits_.total_load();
  }
  [[nodiscard]] auto total_cells() const noexcept -> std::size_t final {
    return bits_.total_bits();
  }
  [[nodiscard]] auto loads() const -> std::vector<std::size_t> final;
  [[nodiscard]] auto processed() const noexcept -> std::uint64_t final { return iter_; }

  [[nodiscard]] auto bits() const noexcept -> const PartitionedBitArray& { return bits_; }
  [[nodiscard]] auto k() const noexcept -> std::size_t { return bits_.partitions(); }
  [[nodiscard]] auto s() const noexcept -> std::size_t { return bits_.bits_per_partition(); }

protected:
  explicit BitFilter(const FilterConfig& config);

  // `probe` holds h_1..h_k; `iter` is the 1-based position of the element.
  virtual void update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t iter) = 0;

  void set_all(std::span<const std::size_t> probe) noexcept;

  PartitionedBitArray bits_;
  Rng rng_;

private:
  HashFamily hash_;
  std::vector<std::size_t> probe_;
  std::uint64_t iter_ = 0;
};

// Reservoir-sampling filter with the p* floor.
//   phase 1 (iter <= s): insert every element.
//   phase 2 (s < iter < p): a DISTINCT element is inserted with probability
//     s / iter; after an insertion one uniform bit of every partition is reset.
//   phase 3 (iter >= p): for a DISTINCT element, every clear h_i is set after
//     resetting one uniformly chosen set bit of partition i.
class RsbfFilter final : public BitFilter {
public:
  explicit RsbfFilter(const FilterConfig& config);
  [[nodiscard]] auto algorithm() const noexcept -> Algorithm override { return Algorithm::rsbf; }
  [[nodiscard]] auto phase3_start() const noexcept -> std::uint64_t { return phase3_start_; }
  [[nodiscard]] auto phase(std::uint64_t iter) const noexcept -> int;

protected:
  void update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t iter) override;

private:
  std::uint64_t phase3_start_;
};

// On DISTINCT: reset one uniform position in every partition, then set H.
class BsbfFilter final : public BitFilter {
public:
  explicit BsbfFilter(const FilterConfig& config) : BitFilter(config) {}
  [[nodiscard]] auto algorithm() const noexcept -> Algorithm override { return Algorithm::bsbf; }

protected:
  void update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t iter) override;
};

// On DISTINCT: reset one uniform position of one uniformly chosen partition,
// then set H.
class BsbfsdFilter final : public BitFilter {
public:
  explicit BsbfsdFilter(const FilterConfig& config) : BitFilter(config) {}
  [[nodiscard]] auto algorithm() const noexcept -> Algorithm override { return Algorithm::bsbfsd; }

protected:
  void update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t iter) override;
};

// On DISTINCT: in every partition i draw a uniform position and reset it with
// probability load(i) / s, then set H.
class RlbsbfFilter final : public BitFilter {
public:
  explicit RlbsbfFilter(const FilterConfig& config) : BitFilter(config) {}
  [[nodiscard]] auto algorithm() const noexcept -> Algorithm override { return Algorithm::rlbsbf; }

protected:
  void update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t iter) override;
};

// Plain partitioned Bloom filter; never deletes.
class StandardBloomFilter final : public BitFilter {
public:
  explicit StandardBloomFilter(const FilterConfig& config) : BitFilter(config) {}
  [[nodiscard]] auto algorithm() const noexcept -> Algorithm override { return Algorithm::stdbf; }

protected:
  void update(std::span<const std::size_t> probe, Verdict verdict, std::uint64_t iter) override;
};

// Stable Bloom filter comparator: one array of small saturating counters.
class StableBloomFilter final : public DedupFilter {
public:
  explicit StableBloomFilter(const FilterConfig& config);
  StableBloomFilter(const SbfParams& params, std::uint64_t seed);

  auto process(std::string_view element) -> Verdict override;
  [[nodiscard]] auto query(std::string_view element) const -> Verdict override;

  [[nodiscard]] auto algorithm() const noexcept -> Algorithm override { return Algorithm::sbf; }
  [[nodiscard]] auto occupied_cells() const noexcept -> std::size_t override { return nonzero_; }
  [[nodiscard]] auto total_cells() const noexcept -> std::size_t override { return cells_.size(); }
  [[nodiscard]] auto loads() const -> std::vector<std::size_t> override { return {nonzero_}; }
  [[nodiscard]] auto processed() const noexcept -> std::uint64_t override { return iter_; }

  [[nodiscard]] auto params() const noexcept -> const SbfParams& { return params_; }
  [[nodiscard]] auto cell(std::size_t index) const noexcept -> unsigned { return cells_[index]; }

private:
  SbfParams params_;
  HashFamily hash_;
  Rng rng_;
  std::vector<std::uint8_t> cells_;
  std::vector<std::size_t> probe_;
  std::size_t nonzero_ = 0;
  std::uint64_t iter_ = 0;
};

// Validates the config and builds the filter it names.
[[nodiscard]] auto make_filter(const FilterConfig& config) -> std::unique_ptr<DedupFilter>;

} // namespace bfdedup
