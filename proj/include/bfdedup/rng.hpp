#pragma once

#include <cstdint>
#include <random>

namespace bfdedup {

// SplitMix64 finalizer. Bijective on 64-bit values.
[[nodiscard]] constexpr auto mix64(std::uint64_t x) noexcept -> std::uint64_t {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

// Seeded generator shared by filters and stream generators.
//
// Bounded draws use Lemire's multiply-shift rejection method directly on the
// engine output, so sequences are identical across standard libraries
// (std::uniform_int_distribution is implementation-defined).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform integer in [0, n). n == 1 consumes no randomness.
  [[nodiscard]] auto below(std::uint64_t n) -> std::uint64_t {
    __extension__ using u128 = unsigned __int128;
    if (n <= 1) {
      return 0;
    }
    std::uint64_t x = engine_();
    auto product = static_cast<u128>(x) * n;
    auto low = static_cast<std::uint64_t>(product);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = engine_();
        product = static_cast<u128>(x) * n;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64U);
  }

  // Uniform double in [0, 1) with 53 random bits.
  [[nodiscard]] auto unit() -> double {
    return static_cast<double>(engine_() >> 11U) * 0x1.0p-53;
  }

  // True with probability p (p <= 0 never, p >= 1 always; one draw either way).
  [[nodiscard]] auto bernoulli(double p) -> bool { return unit() < p; }

  [[nodiscard]] auto next_u64() -> std::uint64_t { return engine_(); }

private:
  std::mt19937_64 engine_;
};

} // namespace bfdedup
