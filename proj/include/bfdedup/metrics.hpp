#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>

#include "bfdedup/filters.hpp"

namespace bfdedup {

enum class OracleMode : std::uint8_t {
  // Remembers 64-bit XXH64 digests. A digest collision mislabels a distinct
  // element as duplicate; with n elements that happens with probability
  // about n^2 / 2^65 (~3e-2 at n = 1e9, ~3e-8 at n = 1e6).
  digest,
  // Remembers the element bytes. Exact.
  exact_bytes,
};

// Ground truth: an element is a duplicate iff it occurred strictly earlier.
class ExactOracle {
public:
  explicit ExactOracle(OracleMode mode = OracleMode::digest) : mode_(mode) {}

  // Labels `element` against the history, then records it.
  auto observe(std::string_view element) -> Verdict;
  [[nodiscard]] auto contains(std::string_view element) const -> bool;
  [[nodiscard]] auto distinct_seen() const noexcept -> std::size_t;
  [[nodiscard]] auto mode() const noexcept -> OracleMode { return mode_; }

private:
  OracleMode mode_;
  std::unordered_set<std::uint64_t> digests_;
  std::unordered_set<std::string> exact_;
};

struct Counters {
  std::uint64_t fp = 0;     // truth distinct, reported duplicate
  std::uint64_t fn = 0;     // truth duplicate, reported distinct
  std::uint64_t tp_dup = 0; // truth duplicate, reported duplicate
  std::uint64_t tn_dis = 0; // truth distinct, reported distinct

  [[nodiscard]] auto n_distinct() const noexcept -> std::uint64_t { return fp + tn_dis; }
  [[nodiscard]] auto n_duplicate() const noexcept -> std::uint64_t { return fn + tp_dup; }
  [[nodiscard]] auto processed() const noexcept -> std::uint64_t {
    return n_distinct() + n_duplicate();
  }

  friend auto operator-(const Counters& a, const Counters& b) -> Counters {
    return {a.fp - b.fp, a.fn - b.fn, a.tp_dup - b.tp_dup, a.tn_dis - b.tn_dis};
  }
  friend auto operator==(const Counters&, const Counters&) -> bool = default;
};

void observe(Counters& counters, Verdict truth, Verdict verdict) noexcept;

struct RatePercent {
  double fpr_pct = 0.0;
  double fnr_pct = 0.0;
  bool fpr_defined = true; // false when no distinct element was seen
  bool fnr_defined = true; // false when no duplicate element was seen
};

// FPR over actually-distinct elements, FNR over actually-duplicate ones.
[[nodiscard]] auto rates(const Counters& counters) noexcept -> RatePercent;

// Occupied cells over total cells.
[[nodiscard]] auto load_fraction(const DedupFilter& filter) noexcept -> double;

} // namespace bfdedup
