#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// Analytical model of the filters on a stream drawn uniformly from a finite
// universe of size U.
//
// X_m is the probability that all k probe bits of the m-th element are set
// when it arrives (m is 1-based, X_1 = 0). Y_m = ((U-1)/U)^(m-1) is the
// probability that the m-th element is genuinely new.
namespace bfdedup::theory {

struct Rates {
  double fpr = 0.0; // Y * X: distinct reported duplicate
  double fnr = 0.0; // (1-Y)(1-X): duplicate reported distinct
  double dup = 0.0; // (1-Y) * X: duplicate reported duplicate
  double dis = 0.0; // Y (1-X): distinct reported distinct
};

// ((U-1)/U)^m: probability that an element is distinct given m predecessors.
[[nodiscard]] auto prob_distinct(std::uint64_t universe, std::uint64_t prior) -> double;

[[nodiscard]] auto rates_from_xy(double x, double y) noexcept -> Rates;

// X_1..X_{m_max} for one algorithm.
class TheoryState {
public:
  TheoryState() = default;
  explicit TheoryState(std::vector<double> x) : x_(std::move(x)) {}

  [[nodiscard]] auto horizon() const noexcept -> std::size_t { return x_.size(); }
  // 1-based.
  [[nodiscard]] auto x(std::size_t m) const -> double { return x_.at(m - 1); }
  [[nodiscard]] auto values() const noexcept -> std::span<const double> { return x_; }
  [[nodiscard]] auto rates(std::size_t m, std::uint64_t universe) const -> Rates;

private:
  std::vector<double> x_;
};

// All recurrences below share the shape
//   X_{m+1} = [ a_m (X_m + (1-X_m)(1 - r_m)) + (1-X_m) g_m ]^k,  a_m = X_m^{1/k},
// with r_m the chance that a set probe bit is wiped by an insertion and g_m
// the chance that an insertion sets it. They are evaluated in the equivalent
// increment form a_{m+1} = a_m + (1-X_m)(g_m - a_m r_m), whose increment is
// non-negative term by term, so rounding can never make X decrease. X is
// clamped to [0, 1] after every step.

// r = g = 1/s, seeded with X_1 = 0, X_2 = 1/s^k.
[[nodiscard]] auto iterate_bsbf(std::size_t k, std::size_t s, std::size_t m_max) -> TheoryState;

// r = 1/(ks), g = 1/s, seeded like BSBF.
[[nodiscard]] auto iterate_bsbfsd(std::size_t k, std::size_t s, std::size_t m_max) -> TheoryState;

// Phase 1 (m <= s+1): X_m = [1 - (1-1/s)^(m-1)]^k.
// After that r = g = 1/m while m < p = rsbf_phase3_start(s, p*), and
// r = g = 1/s from m = p on.
[[nodiscard]] auto iterate_rsbf(std::size_t k, std::size_t s, double pstar, std::size_t m_max)
    -> TheoryState;

// r_m = L_m / s^2, g = 1/s, seeded like BSBF. load[m-1] is the expected
// per-partition load when element m arrives; needs load.size() >= m_max and
// values in [0, s]. Throws std::invalid_argument otherwise.
[[nodiscard]] auto iterate_rlbsbf(std::size_t k, std::size_t s, std::span<const double> load,
                                  std::size_t m_max) -> TheoryState;

// X_m for BSBF from the explicit sum over the last 0 -> 1 transition l:
//   X_{m+1} = [ sum_{l=1..m} (1-X_l)/s * prod_{i=l+1..m} (X_i + (1-X_i)(1-1/s)) ]^k
// Every X_j for j < m is itself produced by the sum form, O(m^2) overall.
[[nodiscard]] auto evaluate_bsbf_direct(std::size_t k, std::size_t s, std::size_t m) -> double;

// Closed-form RSBF false positive probability without the p* floor:
//   ((U-1)/U)^m * [1 - ks/m + ((1 - 1/e) s/m)^k]
// Only meaningful once ks < m; smaller m yields values outside [0, 1].
[[nodiscard]] auto rsbf_closed_form_fpr(std::uint64_t universe, std::uint64_t m, std::size_t k,
                                        std::size_t s) -> double;
[[nodiscard]] inline auto rsbf_closed_form_valid(std::uint64_t m, std::size_t k, std::size_t s)
    -> bool {
  return static_cast<std::uint64_t>(k) * s < m;
}

struct KChoice {
  double k_formula = 0.0;
  std::size_t k = 1;
};

// k_formula = ln(FPR_t) / ln(1 - 1/e); k = round((1 + k_formula) / 2), at least 1.
[[nodiscard]] auto choose_k(double fpr_threshold) -> KChoice;

} // namespace bfdedup::theory
