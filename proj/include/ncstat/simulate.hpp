// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ncstat/random.hpp"
#include "ncstat/stats.hpp"
#include "ncstat/windowing.hpp"

namespace ncstat {

/// Ground-truth mining power. Entities are named `miner-01`, `miner-02`, ...
/// in input order.
class PowerVector {
 public:
  explicit PowerVector(std::vector<double> powers) : powers_(std::move(powers)) {
    if (powers_.empty()) throw std::invalid_argument("power vector is empty");
    long double sum = 0;
    for (const double p : powers_) {
      if (!(p >= 0.0)) throw std::invalid_argument("power vector has a negative entry");
      sum += p;
    }
    if (std::fabs(static_cast<double>(sum) - 1.0) > 1e-12) {
      throw std::invalid_argument("power vector must sum to 1 (got " +
                                  std::to_string(static_cast<double>(sum)) + ")");
    }
    const int width = powers_.size() >= 100 ? 3 : 2;
    long double acc = 0;
    for (std::size_t i = 0; i < powers_.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "miner-%0*zu", width, i + 1);
      names_.emplace_back(buf);
      acc += powers_[i];
      cumulative_.push_back(static_cast<double>(acc));
    }
  }

  std::size_t size() const { return powers_.size(); }
  std::span<const double> values() const { return powers_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Index of the entity drawn by a uniform variate u in [0, 1).
  std::size_t draw(double u) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it != cumulative_.end()) return static_cast<std::size_t>(it - cumulative_.begin());
    // u landed in the rounding gap above the last cumulative value.
    std::size_t i = powers_.size() - 1;
    while (i > 0 && powers_[i] == 0.0) --i;
    return i;
  }

 private:
  std::vector<double> powers_;
  std::vector<double> cumulative_;
  std::vector<std::string> names_;
};

/// Nakamoto coefficient of the true power vector.
inline int true_nc(const PowerVector& powers, double threshold = 0.5) {
  std::vector<double> sorted(powers.values().begin(), powers.values().end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  long double prefix = 0;
  int nc = 0;
  for (const double p : sorted) {
    ++nc;
    prefix += p;
    if (prefix > threshold) break;
  }
  return nc;
}

/// Raw per-entity counts of n categorical draws, in PowerVector order.
inline std::vector<std::uint64_t> sample_counts(const PowerVector& powers, std::uint64_t n,
                                                CounterRng& stream) {
  std::vector<std::uint64_t> counts(powers.size(), 0);
  for (std::uint64_t i = 0; i < n; ++i) ++counts[powers.draw(stream.uniform())];
  return counts;
}

/// One window of n blocks drawn by inverse-CDF sampling.
inline WindowSample sample_window(const PowerVector& powers, std::uint64_t n,
                                  CounterRng& stream) {
  if (n < 1) throw std::invalid_argument("sample_window: n must be at least 1");
  const auto counts = sample_counts(powers, n, stream);
  WindowSample w;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) w.counts.emplace(powers.names()[i], counts[i]);
  }
  w.n = n;
  return w;
}

/// A synthetic chain: `days` days starting at `first`, each with exactly
/// `blocks_per_day` blocks. Day d uses stream (seed, d).
inline DailyMatrix simulate_daily_matrix(const PowerVector& powers,
                                         std::uint64_t blocks_per_day, int days,
                                         std::uint64_t seed, Date first) {
  if (days < 1) throw std::invalid_argument("simulate_daily_matrix: days must be >= 1");
  std::vector<std::vector<std::uint64_t>> rows;
  rows.reserve(static_cast<std::size_t>(days));
  for (int d = 0; d < days; ++d) {
    auto stream = CounterRng::stream(seed, static_cast<std::uint64_t>(d));
    rows.push_back(sample_counts(powers, blocks_per_day, stream));
  }
  return DailyMatrix(first, powers.names(), std::move(rows));
}

struct SimConfig {
  std::vector<double> powers;
  std::uint64_t blocks_per_day = 146;
  int days = 1;  // window length in days
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  /// Coalition size tested by the majority test; defaults to the true NC.
  std::optional<int> coalition;
  /// Worker threads; results do not depend on it.
  unsigned threads = 1;

  void validate() const {
    if (blocks_per_day < 1) throw std::invalid_argument("blocks_per_day must be positive");
    if (days < 1) throw std::invalid_argument("days must be positive");
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    if (coalition && (*coalition < 1 || static_cast<std::size_t>(*coalition) > powers.size())) {
      throw std::invalid_argument("coalition size outside [1, number of entities]");
    }
  }
};

struct CalibrationReport {
  double rejection_rate = 0;
  double coverage_rate = 0;
  double mean_range_width = 0;
  std::uint64_t trials = 0;

  friend bool operator==(const CalibrationReport&, const CalibrationReport&) = default;
};

namespace detail {

struct CalibrationTally {
  std::uint64_t rejected = 0;
  std::uint64_t covered = 0;
  std::uint64_t width_sum = 0;
};

inline CalibrationTally run_trials(const PowerVector& powers, std::uint64_t n, int coalition,
                                   int truth, const TestConfig& test, std::uint64_t seed,
                                   std::uint64_t begin, std::uint64_t end) {
  CalibrationTally tally;
  for (std::uint64_t trial = begin; trial < end; ++trial) {
    auto stream = CounterRng::stream(seed, trial);
    const WindowSample w = sample_window(powers, n, stream);
    const int c = std::min<int>(coalition, static_cast<int>(w.entity_count()));
    if (majority_test(w, c, test).rejected) ++tally.rejected;
    const NcRange r = nc_range(w, test);
    if (r.lower <= truth && truth <= r.upper) ++tally.covered;
    tally.width_sum += static_cast<std::uint64_t>(r.upper - r.lower + 1);
  }
  return tally;
}

}  // namespace detail

/// Monte Carlo calibration of the majority test and the NC range against a
/// known power vector. Trial i draws from CounterRng::stream(seed, i), and
/// only integer tallies are aggregated, so the report is identical for any
/// thread count.
inline CalibrationReport calibrate(const SimConfig& config, const TestConfig& test) {
  config.validate();
  test.validate();
  const PowerVector powers(config.powers);
  const int truth = true_nc(powers, test.threshold);
  const int coalition = config.coalition.value_or(truth);
  const std::uint64_t n = config.blocks_per_day * static_cast<std::uint64_t>(config.days);

  const std::uint64_t workers =
      std::clamp<std::uint64_t>(config.threads, 1, std::max<std::uint64_t>(config.trials, 1));
  std::vector<detail::CalibrationTally> tallies(workers);
  if (workers == 1) {
    tallies[0] = detail::run_trials(powers, n, coalition, truth, test, config.seed, 0,
                                    config.trials);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (config.trials + workers - 1) / workers;
    for (std::uint64_t w = 0; w < workers; ++w) {
      const std::uint64_t begin = std::min(config.trials, w * chunk);
      const std::uint64_t end = std::min(config.trials, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        tallies[w] = detail::run_trials(powers, n, coalition, truth, test, config.seed,
                                        begin, end);
      });
    }
    for (auto& th : pool) th.join();
  }

  detail::CalibrationTally total;
  for (const auto& t : tallies) {
    total.rejected += t.rejected;
    total.covered += t.covered;
    total.width_sum += t.width_sum;
  }
  const auto trials = static_cast<double>(config.trials);
  return {static_cast<double>(total.rejected) / trials,
          static_cast<double>(total.covered) / trials,
          static_cast<double>(total.width_sum) / trials, config.trials};
}

}  // namespace ncstat
