// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ncstat/binomial.hpp"
#include "ncstat/metrics.hpp"
#include "ncstat/windowing.hpp"

namespace ncstat {

/// Significance level and attack threshold of the majority test.
struct TestConfig {
  double alpha = 0.05;
  double threshold = 0.5;

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw std::invalid_argument("alpha must be in (0, 1)");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
      throw std::invalid_argument("threshold must be in (0, 1)");
    }
  }
};

/// One-sided exact test of H0: top-c share <= threshold.
struct TestResult {
  int c = 0;
  std::uint64_t k = 0;
  std::uint64_t n = 0;
  double p_value = 1.0;
  bool rejected = false;
};

/// Range of Nakamoto coefficients not ruled out at `alpha`.
struct NcRange {
  int direct = 0;
  int lower = 0;
  int upper = 0;
  double alpha = 0;
  double p_greater_at_direct = 1.0;

  friend bool operator==(const NcRange&, const NcRange&) = default;
};

/// How the lower branch of `nc_range` obtains its first p-value.
enum class RangeMode {
  /// k is recomputed for every candidate coalition size.
  kClean,
  /// The first lower-tail p-value reuses the success count left behind by
  /// the upper scan (stale when the scan moved).
  kListingCompat,
};

/// Entity counts ranked by descending count, ties by ascending name.
inline std::vector<std::pair<std::string, std::uint64_t>> ranked_counts(
    const WindowSample& window) {
  std::vector<std::pair<std::string, std::uint64_t>> ranked(window.counts.begin(),
                                                            window.counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

/// coalition_sizes[c] = blocks mined by the top c entities, c = 0..N.
inline std::vector<std::uint64_t> top_prefix_sums(const WindowSample& window) {
  const auto ranked = ranked_counts(window);
  std::vector<std::uint64_t> prefix(ranked.size() + 1, 0);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    prefix[i + 1] = prefix[i] + ranked[i].second;
  }
  return prefix;
}

inline TestResult majority_test(const WindowSample& window, int c, const TestConfig& config) {
  config.validate();
  if (window.n == 0) throw std::invalid_argument("majority_test: empty window");
  if (c < 1 || static_cast<std::size_t>(c) > window.entity_count()) {
    throw std::invalid_argument("majority_test: coalition size " + std::to_string(c) +
                                " outside [1, " + std::to_string(window.entity_count()) +
                                "]");
  }
  const auto prefix = top_prefix_sums(window);
  TestResult r;
  r.c = c;
  r.k = prefix[static_cast<std::size_t>(c)];
  r.n = window.n;
  r.p_value = binom_tail_upper(r.k, r.n, config.threshold);
  r.rejected = r.p_value <= config.alpha;
  return r;
}

/// Confidence range around the direct Nakamoto coefficient C0.
///
/// Upper end: if the top-C0 test rejects, C0; otherwise one less than the
/// first larger coalition whose upper-tail test rejects, or the entity count
/// if none does. Lower end: scanning down from C0 while the lower-tail
/// p-value exceeds alpha, one more than the first coalition size where it
/// does not, floored at 1.
inline NcRange nc_range(const WindowSample& window, const TestConfig& config,
                        RangeMode mode = RangeMode::kClean) {
  config.validate();
  if (window.n == 0) throw std::invalid_argument("nc_range: empty window");
  const auto prefix = top_prefix_sums(window);
  const int entities = static_cast<int>(window.entity_count());
  const std::uint64_t n = window.n;
  const double t = config.threshold;
  const double alpha = config.alpha;
  auto p_at = [&](int c) { return binom_tail_upper(prefix[static_cast<std::size_t>(c)], n, t); };
  auto q_at = [&](int c) { return binom_tail_lower(prefix[static_cast<std::size_t>(c)], n, t); };

  std::vector<std::uint64_t> counts(prefix.size() - 1);
  for (std::size_t i = 1; i < prefix.size(); ++i) counts[i - 1] = prefix[i] - prefix[i - 1];

  NcRange range;
  range.alpha = alpha;
  range.direct = nakamoto_coefficient(counts, t);
  const int c0 = range.direct;

  double p = p_at(c0);
  range.p_greater_at_direct = p;
  int upper = c0;
  int last_upper_probe = c0;
  if (p > alpha) {
    while (p > alpha && upper < entities) {
      ++upper;
      p = p_at(upper);
    }
    last_upper_probe = upper;
    if (p <= alpha) --upper;
  }
  range.upper = upper;

  int lower = c0;
  double q = mode == RangeMode::kClean ? q_at(c0) : q_at(last_upper_probe);
  if (q > alpha) {
    while (q > alpha && lower > 0) {
      --lower;
      q = q_at(lower);
    }
    if (q <= alpha) ++lower;
    lower = std::max(lower, 1);
  }
  range.lower = lower;
  return range;
}

struct PassRate {
  double fraction = 0;
  std::size_t passed = 0;
  std::size_t evaluated = 0;      // windows with n > 0
  std::size_t indeterminate = 0;  // windows with n = 0
};

/// Fraction of non-empty windows whose majority test at the direct NC
/// rejects H0. Throws if no window has any blocks.
inline PassRate pass_rate(std::span<const WindowSample> windows, const TestConfig& config) {
  config.validate();
  PassRate r;
  for (const auto& w : windows) {
    if (w.n == 0) {
      ++r.indeterminate;
      continue;
    }
    ++r.evaluated;
    const int c0 = nakamoto_coefficient(w.counts, config.threshold);
    if (majority_test(w, c0, config).rejected) ++r.passed;
  }
  if (r.evaluated == 0) throw std::invalid_argument("pass_rate: every window is empty");
  r.fraction = static_cast<double>(r.passed) / static_cast<double>(r.evaluated);
  return r;
}

}  // namespace ncstat
