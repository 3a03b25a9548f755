// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ncstat/metrics.hpp"
#include "ncstat/stats.hpp"
#include "ncstat/table.hpp"
#include "ncstat/windowing.hpp"

namespace ncstat {

/// One window of the range time series.
struct AnalysisRow {
  Date start_date{};
  std::uint64_t n = 0;
  int direct_nc = 0;
  int lower = 0;
  int upper = 0;
  double p_greater = 1.0;
  bool passes = false;
  bool indeterminate = false;  // the window holds no blocks

  /// The range admits a smaller coefficient than the direct estimate.
  bool lower_than_direct() const { return !indeterminate && lower < direct_nc; }
};

struct SweepCell {
  int granularity_days = 0;
  double alpha = 0;
  double pass_fraction = 0;
  std::size_t window_count = 0;  // non-empty windows in the denominator
};

inline AnalysisRow analyze_window(const WindowSample& w, const TestConfig& config,
                                  RangeMode mode = RangeMode::kClean) {
  AnalysisRow row;
  row.start_date = w.start_date;
  row.n = w.n;
  if (w.n == 0) {
    row.indeterminate = true;
    return row;
  }
  const NcRange r = nc_range(w, config, mode);
  row.direct_nc = r.direct;
  row.lower = r.lower;
  row.upper = r.upper;
  row.p_greater = r.p_greater_at_direct;
  row.passes = r.p_greater_at_direct <= config.alpha;
  return row;
}

/// Direct NC and confidence range for every w-day window, in date order.
/// Zero-block windows are kept and flagged indeterminate.
inline std::vector<AnalysisRow> analyze(const DailyMatrix& matrix, int w,
                                        const TestConfig& config,
                                        RangeMode mode = RangeMode::kClean) {
  config.validate();
  std::vector<AnalysisRow> rows;
  for (const auto& win : windows(matrix, w)) rows.push_back(analyze_window(win, config, mode));
  return rows;
}

/// Pass rate for every (granularity, alpha) pair, granularity-major.
inline std::vector<SweepCell> sweep(const DailyMatrix& matrix,
                                    std::span<const int> granularities,
                                    std::span<const double> alphas, const TestConfig& config) {
  if (granularities.empty() || alphas.empty()) {
    throw std::invalid_argument("sweep: granularity and alpha lists must be non-empty");
  }
  std::vector<SweepCell> cells;
  for (const int g : granularities) {
    const auto wins = windows(matrix, g);
    for (const double a : alphas) {
      TestConfig c = config;
      c.alpha = a;
      const PassRate rate = pass_rate(wins, c);
      cells.push_back({g, a, rate.fraction, rate.evaluated});
    }
  }
  return cells;
}

inline Table analysis_table(std::span<const AnalysisRow> rows) {
  Table t;
  t.columns = {"start_date", "n",          "direct_nc", "lower",
               "upper",      "p_greater", "passes",    "indeterminate"};
  for (const auto& r : rows) {
    std::vector<Cell> cells{format_date(r.start_date), static_cast<std::int64_t>(r.n)};
    if (r.indeterminate) {
      cells.insert(cells.end(), {Cell{}, Cell{}, Cell{}, Cell{}});
    } else {
      cells.insert(cells.end(),
                   {Cell{static_cast<std::int64_t>(r.direct_nc)},
                    Cell{static_cast<std::int64_t>(r.lower)},
                    Cell{static_cast<std::int64_t>(r.upper)}, Cell{r.p_greater}});
    }
    cells.emplace_back(r.passes);
    cells.emplace_back(r.indeterminate);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

inline Table sweep_table(std::span<const SweepCell> cells) {
  Table t;
  t.columns = {"granularity_days", "alpha", "pass_fraction", "window_count"};
  for (const auto& c : cells) {
    t.rows.push_back({static_cast<std::int64_t>(c.granularity_days), c.alpha,
                      c.pass_fraction, static_cast<std::int64_t>(c.window_count)});
  }
  return t;
}

/// Per-window decentralization metrics. Metric cells are empty for windows
/// without blocks.
inline Table metrics_table(std::span<const WindowSample> wins) {
  Table t;
  t.columns = {"start_date", "n", "nc", "hhi", "entropy_bits", "gini"};
  for (const auto& w : wins) {
    std::vector<Cell> cells{format_date(w.start_date), static_cast<std::int64_t>(w.n)};
    const MetricValues m = compute_metrics(w.counts);
    cells.emplace_back(static_cast<std::int64_t>(m.nc));
    if (w.n == 0) {
      cells.insert(cells.end(), {Cell{}, Cell{}, Cell{}});
    } else {
      cells.insert(cells.end(), {Cell{m.hhi}, Cell{m.entropy_bits}, Cell{m.gini}});
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace ncstat
