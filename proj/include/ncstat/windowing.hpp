// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncstat/attribution.hpp"
#include "ncstat/timestamp.hpp"

namespace ncstat {

/// Block counts per (UTC day, entity) over a contiguous range of days.
class DailyMatrix {
 public:
  DailyMatrix() = default;

  /// `counts[d][e]` is the number of blocks entity `entities[e]` mined on
  /// `first + d`. Entities must be sorted and unique.
  DailyMatrix(Date first, std::vector<std::string> entities,
              std::vector<std::vector<std::uint64_t>> counts)
      : first_(first), entities_(std::move(entities)), counts_(std::move(counts)) {
    if (!std::is_sorted(entities_.begin(), entities_.end()) ||
        std::adjacent_find(entities_.begin(), entities_.end()) != entities_.end()) {
      throw std::invalid_argument("DailyMatrix: entities must be sorted and unique");
    }
    for (const auto& row : counts_) {
      if (row.size() != entities_.size()) {
        throw std::invalid_argument("DailyMatrix: row width differs from entity count");
      }
    }
  }

  bool empty() const { return counts_.empty(); }
  std::size_t day_count() const { return counts_.size(); }
  Date first_date() const { return first_; }
  Date date(std::size_t day) const { return first_ + std::chrono::days{day}; }
  const std::vector<std::string>& entities() const { return entities_; }
  std::span<const std::uint64_t> day(std::size_t d) const { return counts_.at(d); }

  std::uint64_t total() const {
    std::uint64_t sum = 0;
    for (const auto& row : counts_) {
      for (const auto c : row) sum += c;
    }
    return sum;
  }

 private:
  Date first_{};
  std::vector<std::string> entities_;
  std::vector<std::vector<std::uint64_t>> counts_;
};

/// Per-entity block counts over days [start_date, start_date + length_days).
/// Only entities with a non-zero count appear in `counts`.
struct WindowSample {
  Date start_date{};
  int length_days = 1;
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t n = 0;

  /// Builds a sample from raw counts; zero entries are dropped.
  static WindowSample from_counts(const std::map<std::string, std::uint64_t>& counts,
                                  Date start = Date{}, int length_days = 1) {
    WindowSample w;
    w.start_date = start;
    w.length_days = length_days;
    for (const auto& [name, c] : counts) {
      if (c == 0) continue;
      w.counts.emplace(name, c);
      w.n += c;
    }
    return w;
  }

  std::size_t entity_count() const { return counts.size(); }
};

/// Buckets blocks by the UTC calendar date of their timestamp; days without
/// blocks inside the covered range are zero rows.
inline DailyMatrix build_daily_matrix(std::span<const AttributedBlock> blocks) {
  if (blocks.empty()) return {};
  Date lo = utc_date(blocks.front().record.timestamp);
  Date hi = lo;
  std::map<std::string, std::size_t> index;
  for (const auto& b : blocks) {
    const Date d = utc_date(b.record.timestamp);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    index.emplace(b.entity.name, 0);
  }
  std::vector<std::string> entities;
  entities.reserve(index.size());
  for (auto& [name, i] : index) {
    i = entities.size();
    entities.push_back(name);
  }
  const auto days = static_cast<std::size_t>((hi - lo).count()) + 1;
  std::vector<std::vector<std::uint64_t>> counts(
      days, std::vector<std::uint64_t>(entities.size(), 0));
  for (const auto& b : blocks) {
    const auto d = static_cast<std::size_t>((utc_date(b.record.timestamp) - lo).count());
    ++counts[d][index[b.entity.name]];
  }
  return DailyMatrix(lo, std::move(entities), std::move(counts));
}

/// Sliding windows of `w` days with a one-day stride, labelled by start date.
/// Yields max(0, D - w + 1) windows for D days; partial windows are dropped.
inline std::vector<WindowSample> windows(const DailyMatrix& matrix, int w) {
  if (w <= 0) throw std::invalid_argument("window length must be at least 1 day");
  std::vector<WindowSample> out;
  const std::size_t days = matrix.day_count();
  const auto width = static_cast<std::size_t>(w);
  if (days < width) return out;
  const auto& names = matrix.entities();
  std::vector<std::uint64_t> running(names.size(), 0);
  for (std::size_t d = 0; d < width; ++d) {
    const auto row = matrix.day(d);
    for (std::size_t e = 0; e < names.size(); ++e) running[e] += row[e];
  }
  out.reserve(days - width + 1);
  for (std::size_t start = 0;; ++start) {
    WindowSample s;
    s.start_date = matrix.date(start);
    s.length_days = w;
    for (std::size_t e = 0; e < names.size(); ++e) {
      if (running[e] == 0) continue;
      s.counts.emplace_hint(s.counts.end(), names[e], running[e]);
      s.n += running[e];
    }
    out.push_back(std::move(s));
    if (start + width >= days) break;
    const auto drop = matrix.day(start);
    const auto add = matrix.day(start + width);
    for (std::size_t e = 0; e < names.size(); ++e) running[e] += add[e] - drop[e];
  }
  return out;
}

}  // namespace ncstat
