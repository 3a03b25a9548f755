// SPDX-License-Identifier: Apache-2.0
//
// Exact binomial tail probabilities.
//
// The probability mass at the start of a tail is evaluated with Loader's
// saddle-point expansion (Stirling remainder + deviance), which keeps full
// relative accuracy for large n where a lgamma-based formula loses digits to
// cancellation. The tail is then summed outward from that term using the
// ratio recurrence. Only the tail that lies away from the mean is summed
// directly; the other one is its complement, so every returned value is
// either a direct tail or one minus a direct tail that is at most ~1/2.
//
// Everything is carried out in long double and in log space so that tails
// far below DBL_MIN are still available through the log_* functions.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ncstat {

namespace detail {

/// log(n!) - log(sqrt(2 pi n) (n/e)^n) for integer n >= 1.
inline long double stirling_remainder(std::uint64_t n) {
  constexpr long double kHalfLog2Pi = 0.918938533204672741780329736405617639861L;
  if (n <= 15) {
    long double fact = 1;
    for (std::uint64_t i = 2; i <= n; ++i) fact *= static_cast<long double>(i);
    const auto x = static_cast<long double>(n);
    return std::log(fact) - (x + 0.5L) * std::log(x) + x - kHalfLog2Pi;
  }
  constexpr long double s0 = 1.0L / 12, s1 = 1.0L / 360, s2 = 1.0L / 1260,
                        s3 = 1.0L / 1680, s4 = 1.0L / 1188, s5 = 691.0L / 360360,
                        s6 = 1.0L / 156;
  const auto x = static_cast<long double>(n);
  const long double xx = x * x;
  if (n > 500) return (s0 - (s1 - s2 / xx) / xx) / x;
  if (n > 80) return (s0 - (s1 - (s2 - s3 / xx) / xx) / xx) / x;
  return (s0 - (s1 - (s2 - (s3 - (s4 - (s5 - s6 / xx) / xx) / xx) / xx) / xx) / xx) / x;
}

/// Deviance term x log(x / m) + m - x, evaluated without cancellation when
/// x is close to m.
inline long double deviance(long double x, long double m) {
  if (std::fabs(x - m) < 0.1L * (x + m)) {
    long double v = (x - m) / (x + m);
    long double s = (x - m) * v;
    long double ej = 2 * x * v;
    v *= v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const long double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / m) + m - x;
}

inline void check_tail_args(std::uint64_t k, std::uint64_t n, double t) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::invalid_argument("binomial tail: success probability must be in (0, 1)");
  }
  if (k > n) throw std::invalid_argument("binomial tail: k exceeds n");
}

/// floor(n t): tails at or below it are summed as lower tails, tails above
/// it as upper tails. Both recurrences are strictly contracting there.
inline std::uint64_t tail_split(std::uint64_t n, double t) {
  return static_cast<std::uint64_t>(std::floor(static_cast<long double>(n) * t));
}

}  // namespace detail

/// log P(X = k) for X ~ Binomial(n, t).
inline long double binom_log_pmf(std::uint64_t k, std::uint64_t n, double t) {
  detail::check_tail_args(k, n, t);
  constexpr long double kLog2Pi = 1.837877066409345483560659472811235279723L;
  const long double p = t;
  const long double q = 1.0L - p;  // exact for a double t
  const auto nn = static_cast<long double>(n);
  if (k == 0) {
    if (n == 0) return 0;
    return p < 0.1L ? -detail::deviance(nn, nn * q) - nn * p : nn * std::log(q);
  }
  if (k == n) {
    return q < 0.1L ? -detail::deviance(nn, nn * p) - nn * q : nn * std::log(p);
  }
  const auto x = static_cast<long double>(k);
  const long double lc = detail::stirling_remainder(n) - detail::stirling_remainder(k) -
                         detail::stirling_remainder(n - k) - detail::deviance(x, nn * p) -
                         detail::deviance(nn - x, nn * q);
  const long double lf = kLog2Pi + std::log(x) + std::log1p(-x / nn);
  return lc - 0.5L * lf;
}

namespace detail {

/// log sum_{j=0..k} pmf(j), for k <= floor(n t).
inline long double direct_lower_log(std::uint64_t k, std::uint64_t n, double t) {
  const long double p = t;
  const long double q = 1.0L - p;
  const long double odds = q / p;
  long double sum = 1, term = 1;
  for (std::uint64_t j = k; j > 0; --j) {
    const long double r =
        static_cast<long double>(j) / static_cast<long double>(n - j + 1) * odds;
    term *= r;
    sum += term;
    if (term * r < sum * std::numeric_limits<long double>::epsilon() * (1 - r) * 0.25L) {
      break;
    }
  }
  return binom_log_pmf(k, n, t) + std::log(sum);
}

/// log sum_{j=k..n} pmf(j), for k > floor(n t).
inline long double direct_upper_log(std::uint64_t k, std::uint64_t n, double t) {
  const long double p = t;
  const long double q = 1.0L - p;
  const long double odds = p / q;
  long double sum = 1, term = 1;
  for (std::uint64_t j = k; j < n; ++j) {
    const long double r =
        static_cast<long double>(n - j) / static_cast<long double>(j + 1) * odds;
    term *= r;
    sum += term;
    if (term * r < sum * std::numeric_limits<long double>::epsilon() * (1 - r) * 0.25L) {
      break;
    }
  }
  return binom_log_pmf(k, n, t) + std::log(sum);
}

}  // namespace detail

/// log P(X >= k) for X ~ Binomial(n, t).
inline long double log_binom_tail_upper(std::uint64_t k, std::uint64_t n, double t) {
  detail::check_tail_args(k, n, t);
  if (k == 0) return 0;
  if (k > detail::tail_split(n, t)) return detail::direct_upper_log(k, n, t);
  return std::log1p(-std::exp(detail::direct_lower_log(k - 1, n, t)));
}

/// log P(X <= k) for X ~ Binomial(n, t).
inline long double log_binom_tail_lower(std::uint64_t k, std::uint64_t n, double t) {
  detail::check_tail_args(k, n, t);
  if (k == n) return 0;
  if (k <= detail::tail_split(n, t)) return detail::direct_lower_log(k, n, t);
  return std::log1p(-std::exp(detail::direct_upper_log(k + 1, n, t)));
}

/// P(X >= k) for X ~ Binomial(n, t). Throws std::invalid_argument when
/// k > n or t is outside (0, 1).
inline double binom_tail_upper(std::uint64_t k, std::uint64_t n, double t) {
  detail::check_tail_args(k, n, t);
  if (k == 0) return 1.0;
  if (k > detail::tail_split(n, t)) {
    return static_cast<double>(std::exp(detail::direct_upper_log(k, n, t)));
  }
  return static_cast<double>(1.0L - std::exp(detail::direct_lower_log(k - 1, n, t)));
}

/// P(X <= k) for X ~ Binomial(n, t).
inline double binom_tail_lower(std::uint64_t k, std::uint64_t n, double t) {
  detail::check_tail_args(k, n, t);
  if (k == n) return 1.0;
  if (k <= detail::tail_split(n, t)) {
    return static_cast<double>(std::exp(detail::direct_lower_log(k, n, t)));
  }
  return static_cast<double>(1.0L - std::exp(detail::direct_upper_log(k + 1, n, t)));
}

}  // namespace ncstat
