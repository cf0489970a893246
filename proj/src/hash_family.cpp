#include "bfdedup/hash_family.hpp"

#include <bit>
#include <cassert>
#include <cstring>
#include <stdexcept>

#include "bfdedup/rng.hpp"

namespace bfdedup {

namespace {

constexpr std::uint64_t kPrime1 = 0x9E3779B185EBCA87ULL;
constexpr std::uint64_t kPrime2 = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t kPrime3 = 0x165667B19E3779F9ULL;
constexpr std::uint64_t kPrime4 = 0x85EBCA77C2B2AE63ULL;
constexpr std::uint64_t kPrime5 = 0x27D4EB2F165667C5ULL;

static_assert(std::endian::native == std::endian::little, "xxh64 reader assumes little-endian");

inline auto read64(const char* p) noexcept -> std::uint64_t {
  std::uint64_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline auto read32(const char* p) noexcept -> std::uint64_t {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline auto round(std::uint64_t acc, std::uint64_t input) noexcept -> std::uint64_t {
  acc += input * kPrime2;
  acc = std::rotl(acc, 31);
  return acc * kPrime1;
}

inline auto merge_round(std::uint64_t acc, std::uint64_t val) noexcept -> std::uint64_t {
  acc ^= round(0, val);
  return acc * kPrime1 + kPrime4;
}

} // namespace

auto xxh64(std::string_view data, std::uint64_t seed) noexcept -> std::uint64_t {
  const char* p = data.data();
  const char* const end = p + data.size();
  std::uint64_t h;

  if (data.size() >= 32) {
    std::uint64_t v1 = seed + kPrime1 + kPrime2;
    std::uint64_t v2 = seed + kPrime2;
    std::uint64_t v3 = seed;
    std::uint64_t v4 = seed - kPrime1;
    const char* const limit = end - 32;
    do {
      v1 = round(v1, read64(p));
      v2 = round(v2, read64(p + 8));
      v3 = round(v3, read64(p + 16));
      v4 = round(v4, read64(p + 24));
      p += 32;
    } while (p <= limit);
    h = std::rotl(v1, 1) + std::rotl(v2, 7) + std::rotl(v3, 12) + std::rotl(v4, 18);
    h = merge_round(h, v1);
    h = merge_round(h, v2);
    h = merge_round(h, v3);
    h = merge_round(h, v4);
  } else {
    h = seed + kPrime5;
  }

  h += static_cast<std::uint64_t>(data.size());

  while (end - p >= 8) {
    h ^= round(0, read64(p));
    h = std::rotl(h, 27) * kPrime1 + kPrime4;
    p += 8;
  }
  if (end - p >= 4) {
    h ^= read32(p) * kPrime1;
    h = std::rotl(h, 23) * kPrime2 + kPrime3;
    p += 4;
  }
  while (p < end) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(*p)) * kPrime5;
    h = std::rotl(h, 11) * kPrime1;
    ++p;
  }

  h ^= h >> 33U;
  h *= kPrime2;
  h ^= h >> 29U;
  h *= kPrime3;
  h ^= h >> 32U;
  return h;
}

HashFamily::HashFamily(std::size_t functions, std::size_t range, std::uint64_t seed)
    : functions_(functions), range_(range), seed_(seed), seed1_(mix64(seed)),
      seed2_(mix64(seed1_)) {
  if (functions == 0 || range == 0) {
    throw std::invalid_argument("hash family needs k >= 1 and s >= 1");
  }
}

void HashFamily::map(std::string_view element, std::span<std::size_t> out) const noexcept {
  assert(out.size() == functions_);
  const std::uint64_t g1 = xxh64(element, seed1_);
  const std::uint64_t g2 = xxh64(element, seed2_) | 1U;
  for (std::size_t i = 0; i < functions_; ++i) {
    out[i] = static_cast<std::size_t>((g1 + i * g2) % range_);
  }
}

auto HashFamily::map(std::string_view element) const -> std::vector<std::size_t> {
  std::vector<std::size_t> out(functions_);
  map(element, out);
  return out;
}

} // namespace bfdedup
