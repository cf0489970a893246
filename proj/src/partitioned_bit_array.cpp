#include "bfdedup/partitioned_bit_array.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <numeric>
#include <stdexcept>

namespace bfdedup {

PartitionedBitArray::PartitionedBitArray(std::size_t partitions, std::size_t bits_per_partition)
    : partitions_(partitions),
      bits_(bits_per_partition),
      words_per_partition_((bits_per_partition + 63U) / 64U),
      words_(partitions * words_per_partition_, 0),
      load_(partitions, 0) {
  if (partitions == 0 || bits_per_partition == 0) {
    throw std::invalid_argument("partitioned bit array needs k >= 1 and s >= 1");
  }
}

auto PartitionedBitArray::set_bit(std::size_t partition, std::size_t position) noexcept -> bool {
  assert(partition < partitions_ && position < bits_);
  std::uint64_t& word = words_[word_index(partition, position)];
  const std::uint64_t mask = std::uint64_t{1} << (position & 63U);
  if ((word & mask) != 0) {
    return false;
  }
  word |= mask;
  ++load_[partition];
  return true;
}

auto PartitionedBitArray::reset_bit(std::size_t partition, std::size_t position) noexcept -> bool {
  assert(partition < partitions_ && position < bits_);
  std::uint64_t& word = words_[word_index(partition, position)];
  const std::uint64_t mask = std::uint64_t{1} << (position & 63U);
  if ((word & mask) == 0) {
    return false;
  }
  word &= ~mask;
  --load_[partition];
  return true;
}

auto PartitionedBitArray::total_load() const noexcept -> std::size_t {
  return std::accumulate(load_.begin(), load_.end(), std::size_t{0});
}

auto PartitionedBitArray::popcount(std::size_t partition) const noexcept -> std::size_t {
  const auto first = words_.begin() + static_cast<std::ptrdiff_t>(partition * words_per_partition_);
  std::size_t count = 0;
  for (auto it = first; it != first + static_cast<std::ptrdiff_t>(words_per_partition_); ++it) {
    count += static_cast<std::size_t>(std::popcount(*it));
  }
  return count;
}

auto PartitionedBitArray::sample_set_position(std::size_t partition, Rng& rng) const
    -> std::size_t {
  assert(partition < partitions_);
  const std::size_t load = load_[partition];
  if (load == 0) {
    throw std::logic_error("no set bit available");
  }
  const std::size_t budget = 4 * bits_ / std::max<std::size_t>(load, 1);
  for (std::size_t attempt = 0; attempt < budget; ++attempt) {
    const std::size_t position = sample_uniform_position(rng);
    if (test(partition, position)) {
      return position;
    }
  }
  return scan_from(partition, sample_uniform_position(rng));
}

auto PartitionedBitArray::scan_from(std::size_t partition, std::size_t start) const noexcept
    -> std::size_t {
  // Caller guarantees at least one set bit, so this terminates.
  const std::size_t base = partition * words_per_partition_;
  std::size_t word = start >> 6U;
  std::uint64_t bits = words_[base + word] & (~std::uint64_t{0} << (start & 63U));
  for (;;) {
    if (bits != 0) {
      const std::size_t position = (word << 6U) + static_cast<std::size_t>(std::countr_zero(bits));
      if (position < bits_) {
        return position;
      }
    }
    word = (word + 1 == words_per_partition_) ? 0 : word + 1;
    bits = words_[base + word];
  }
}

void PartitionedBitArray::clear() noexcept {
  std::fill(words_.begin(), words_.end(), 0);
  std::fill(load_.begin(), load_.end(), 0);
}

} // namespace bfdedup
