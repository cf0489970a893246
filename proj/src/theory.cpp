#include "bfdedup/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bfdedup/filters.hpp"

namespace bfdedup::theory {

namespace {

void require_shape(std::size_t k, std::size_t s, std::size_t m_max) {
  if (k == 0 || s == 0) {
    throw std::invalid_argument("theory needs k >= 1 and s >= 1");
  }
  if (m_max == 0) {
    throw std::invalid_argument("theory horizon must be at least 1");
  }
}

auto clamp_unit(double v) noexcept -> double { return std::clamp(v, 0.0, 1.0); }

// Runs the shared recurrence from X_{start} = x[start-1] (already filled) up
// to X_{m_max}. `rates(m)` returns {r_m, g_m}.
template <typename RateFn>
void advance(std::vector<double>& x, std::size_t k, std::size_t start, RateFn rates) {
  const double inv_k = 1.0 / static_cast<double>(k);
  const auto kd = static_cast<double>(k);
  double a = std::pow(x[start - 1], inv_k);
  for (std::size_t m = start; m < x.size(); ++m) {
    const double xm = x[m - 1];
    const auto [r, g] = rates(m);
    a = std::min(1.0, a + (1.0 - xm) * (g - a * r));
    x[m] = clamp_unit(std::pow(a, kd));
  }
}

auto seeded(std::size_t k, std::size_t s, std::size_t m_max) -> std::vector<double> {
  std::vector<double> x(m_max, 0.0);
  if (m_max >= 2) {
    x[1] = std::pow(1.0 / static_cast<double>(s), static_cast<double>(k));
  }
  return x;
}

} // namespace

auto prob_distinct(std::uint64_t universe, std::uint64_t prior) -> double {
  if (universe == 0) {
    throw std::invalid_argument("universe size must be at least 1");
  }
  if (universe == 1) {
    return prior == 0 ? 1.0 : 0.0;
  }
  // exp(m log1p(-1/U)) keeps full precision where pow((U-1)/U, m) loses
  // digits to the rounded base.
  return std::exp(static_cast<double>(prior) * std::log1p(-1.0 / static_cast<double>(universe)));
}

auto rates_from_xy(double x, double y) noexcept -> Rates {
  return Rates{.fpr = y * x, .fnr = (1.0 - y) * (1.0 - x), .dup = (1.0 - y) * x,
               .dis = y * (1.0 - x)};
}

auto TheoryState::rates(std::size_t m, std::uint64_t universe) const -> Rates {
  return rates_from_xy(x(m), prob_distinct(universe, m - 1));
}

auto iterate_bsbf(std::size_t k, std::size_t s, std::size_t m_max) -> TheoryState {
  require_shape(k, s, m_max);
  auto x = seeded(k, s, m_max);
  const double inv_s = 1.0 / static_cast<double>(s);
  if (m_max > 2) {
    advance(x, k, 2, [=](std::size_t) { return std::pair{inv_s, inv_s}; });
  }
  return TheoryState(std::move(x));
}

auto iterate_bsbfsd(std::size_t k, std::size_t s, std::size_t m_max) -> TheoryState {
  require_shape(k, s, m_max);
  auto x = seeded(k, s, m_max);
  const double inv_s = 1.0 / static_cast<double>(s);
  const double inv_ks = inv_s / static_cast<double>(k);
  if (m_max > 2) {
    advance(x, k, 2, [=](std::size_t) { return std::pair{inv_ks, inv_s}; });
  }
  return TheoryState(std::move(x));
}

auto iterate_rsbf(std::size_t k, std::size_t s, double pstar, std::size_t m_max) -> TheoryState {
  require_shape(k, s, m_max);
  if (!(pstar > 0.0 && pstar <= 1.0)) {
    throw std::invalid_argument("p* must lie in (0, 1]");
  }
  std::vector<double> x(m_max, 0.0);
  const double keep = 1.0 - 1.0 / static_cast<double>(s);
  const auto kd = static_cast<double>(k);
  // Phase 1 inserts unconditionally: after j insertions a bit is set w.p. 1-(1-1/s)^j.
  const std::size_t fill_end = std::min(m_max, s + 1);
  for (std::size_t m = 2; m <= fill_end; ++m) {
    const double filled = 1.0 - std::pow(keep, static_cast<double>(m - 1));
    x[m - 1] = clamp_unit(std::pow(filled, kd));
  }
  if (m_max > s + 1) {
    const std::uint64_t p = rsbf_phase3_start(s, pstar);
    const double inv_s = 1.0 / static_cast<double>(s);
    advance(x, k, s + 1, [=](std::size_t m) {
      const double rate = m < p ? 1.0 / static_cast<double>(m) : inv_s;
      return std::pair{rate, rate};
    });
  }
  return TheoryState(std::move(x));
}

auto iterate_rlbsbf(std::size_t k, std::size_t s, std::span<const double> load, std::size_t m_max)
    -> TheoryState {
  require_shape(k, s, m_max);
  if (load.size() < m_max) {
    throw std::invalid_argument("load trajectory has " + std::to_string(load.size()) +
                                " entries, horizon needs " + std::to_string(m_max));
  }
  const double sd = static_cast<double>(s);
  for (double l : load.first(m_max)) {
    if (!(l >= 0.0 && l <= sd)) {
      throw std::invalid_argument("load trajectory values must lie in [0, s]");
    }
  }
  auto x = seeded(k, s, m_max);
  const double inv_s = 1.0 / sd;
  const double inv_s2 = inv_s * inv_s;
  if (m_max > 2) {
    advance(x, k, 2, [&](std::size_t m) { return std::pair{load[m - 1] * inv_s2, inv_s}; });
  }
  return TheoryState(std::move(x));
}

auto evaluate_bsbf_direct(std::size_t k, std::size_t s, std::size_t m) -> double {
  require_shape(k, s, m);
  const double inv_s = 1.0 / static_cast<double>(s);
  const double keep = 1.0 - inv_s;
  const auto kd = static_cast<double>(k);
  // x[j] = X_{j+1}
  std::vector<double> x(m, 0.0);
  for (std::size_t next = 1; next < m; ++next) {
    // X_{next+1}: sum over l = next..1, growing the survival product leftwards.
    double sum = 0.0;
    double survive = 1.0;
    for (std::size_t l = next; l >= 1; --l) {
      sum += (1.0 - x[l - 1]) * inv_s * survive;
      survive *= x[l - 1] + (1.0 - x[l - 1]) * keep;
    }
    x[next] = clamp_unit(std::pow(sum, kd));
  }
  return x[m - 1];
}

auto rsbf_closed_form_fpr(std::uint64_t universe, std::uint64_t m, std::size_t k, std::size_t s)
    -> double {
  if (m == 0) {
    throw std::invalid_argument("closed-form FPR needs m > 0");
  }
  const double md = static_cast<double>(m);
  const double ks = static_cast<double>(k) * static_cast<double>(s);
  const double tail = std::pow((1.0 - 1.0 / std::numbers::e) * static_cast<double>(s) / md,
                               static_cast<double>(k));
  return prob_distinct(universe, m) * (1.0 - ks / md + tail);
}

auto choose_k(double fpr_threshold) -> KChoice {
  if (!(fpr_threshold > 0.0 && fpr_threshold < 1.0)) {
    throw std::invalid_argument("FPR threshold must lie in (0, 1)");
  }
  KChoice choice;
  choice.k_formula = std::log(fpr_threshold) / std::log(1.0 - 1.0 / std::numbers::e);
  const double mean = (1.0 + choice.k_formula) / 2.0;
  choice.k = static_cast<std::size_t>(std::max<long long>(1, std::llround(mean)));
  return choice;
}

} // namespace bfdedup::theory
