#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bfdedup {

// XXH64 digest (bit-compatible with the reference xxHash implementation).
[[nodiscard]] auto xxh64(std::string_view data, std::uint64_t seed) noexcept -> std::uint64_t;

inline constexpr std::string_view kDigestName = "xxh64";

// k positions in [0, s) per element by double hashing:
//   position_i = (g1 + i * (g2 | 1)) mod s
// with g1, g2 two XXH64 digests under seeds derived from the master seed.
class HashFamily {
public:
  HashFamily(std::size_t functions, std::size_t range, std::uint64_t seed);

  [[nodiscard]] auto functions() const noexcept -> std::size_t { return functions_; }
  [[nodiscard]] auto range() const noexcept -> std::size_t { return range_; }
  [[nodiscard]] auto seed() const noexcept -> std::uint64_t { return seed_; }

  // `out` must have exactly functions() entries.
  void map(std::string_view element, std::span<std::size_t> out) const noexcept;
  [[nodiscard]] auto map(std::string_view element) const -> std::vector<std::size_t>;

private:
  std::size_t functions_;
  std::size_t range_;
  std::uint64_t seed_;
  std::uint64_t seed1_;
  std::uint64_t seed2_;
};

} // namespace bfdedup
