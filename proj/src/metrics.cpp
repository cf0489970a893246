#include "bfdedup/metrics.hpp"

#include <algorithm>

#include "bfdedup/hash_family.hpp"

namespace bfdedup {

namespace {
constexpr std::uint64_t kOracleSeed = 0x0DDB1A5E5BAD5EEDULL;
} // namespace

auto ExactOracle::observe(std::string_view element) -> Verdict {
  const bool inserted = mode_ == OracleMode::digest
                            ? digests_.insert(xxh64(element, kOracleSeed)).second
                            : exact_.emplace(element).second;
  return inserted ? Verdict::distinct : Verdict::duplicate;
}

auto ExactOracle::contains(std::string_view element) const -> bool {
  if (mode_ == OracleMode::digest) {
    return digests_.contains(xxh64(element, kOracleSeed));
  }
  return exact_.contains(std::string(element));
}

auto ExactOracle::distinct_seen() const noexcept -> std::size_t {
  return mode_ == OracleMode::digest ? digests_.size() : exact_.size();
}

void observe(Counters& counters, Verdict truth, Verdict verdict) noexcept {
  if (truth == Verdict::distinct) {
    ++(verdict == Verdict::duplicate ? counters.fp : counters.tn_dis);
  } else {
    ++(verdict == Verdict::distinct ? counters.fn : counters.tp_dup);
  }
}

auto rates(const Counters& counters) noexcept -> RatePercent {
  RatePercent out;
  const std::uint64_t distinct = counters.n_distinct();
  const std::uint64_t duplicate = counters.n_duplicate();
  out.fpr_defined = distinct > 0;
  out.fnr_defined = duplicate > 0;
  out.fpr_pct = 100.0 * static_cast<double>(counters.fp) /
                static_cast<double>(std::max<std::uint64_t>(distinct, 1));
  out.fnr_pct = 100.0 * static_cast<double>(counters.fn) /
                static_cast<double>(std::max<std::uint64_t>(duplicate, 1));
  return out;
}

auto load_fraction(const DedupFilter& filter) noexcept -> double {
  const std::size_t total = filter.total_cells();
  return total == 0 ? 0.0
                    : static_cast<double>(filter.occupied_cells()) / static_cast<double>(total);
}

} // namespace bfdedup
