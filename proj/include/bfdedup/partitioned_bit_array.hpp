#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bfdedup/rng.hpp"

namespace bfdedup {

// k independent bit arrays ("partitions") of s bits each, with the popcount of
// every partition maintained incrementally.
//
// Index arguments are preconditions: partition < k, position < s. They are
// checked with assert() only.
class PartitionedBitArray {
public:
  PartitionedBitArray(std::size_t partitions, std::size_t bits_per_partition);

  [[nodiscard]] auto partitions() const noexcept -> std::size_t { return partitions_; }
  [[nodiscard]] auto bits_per_partition() const noexcept -> std::size_t { return bits_; }
  [[nodiscard]] auto total_bits() const noexcept -> std::size_t { return partitions_ * bits_; }

  [[nodiscard]] auto test(std::size_t partition, std::size_t position) const noexcept -> bool {
    const std::uint64_t word = words_[word_index(partition, position)];
    return ((word >> (position & 63U)) & 1U) != 0;
  }

  // Returns true iff the bit was previously clear.
  auto set_bit(std::size_t partition, std::size_t position) noexcept -> bool;
  // Returns true iff the bit was previously set.
  auto reset_bit(std::size_t partition, std::size_t position) noexcept -> bool;

  [[nodiscard]] auto load(std::size_t partition) const noexcept -> std::size_t {
    return load_[partition];
  }
  [[nodiscard]] auto total_load() const noexcept -> std::size_t;

  // Recounts a partition from the raw words. Used to audit load().
  [[nodiscard]] auto popcount(std::size_t partition) const noexcept -> std::size_t;

  [[nodiscard]] auto sample_uniform_position(Rng& rng) const -> std::size_t {
    return static_cast<std::size_t>(rng.below(bits_));
  }

  // Uniform over the set bits of `partition`. Throws std::logic_error when the
  // partition has no set bit.
  //
  // Rejection sampling over uniform positions; after 4*s/load misses it falls
  // back to scanning forward (cyclically) from a random start.
  [[nodiscard]] auto sample_set_position(std::size_t partition, Rng& rng) const -> std::size_t;

  void clear() noexcept;

  friend auto operator==(const PartitionedBitArray&, const PartitionedBitArray&) -> bool = default;

private:
  [[nodiscard]] auto word_index(std::size_t partition, std::size_t position) const noexcept
      -> std::size_t {
    return partition * words_per_partition_ + (position >> 6U);
  }
  [[nodiscard]] auto scan_from(std::size_t partition, std::size_t start) const noexcept
      -> std::size_t;

  std::size_t partitions_;
  std::size_t bits_;
  std::size_t words_per_partition_;
  std::vector<std::uint64_t> words_;
  std::vector<std::size_t> load_;
};

} // namespace bfdedup
