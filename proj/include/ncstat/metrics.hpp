// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ncstat {

/// Smallest number of top producers whose combined count strictly exceeds
/// `threshold` of the total. Returns 0 for an empty or all-zero input.
inline int nakamoto_coefficient(std::span<const std::uint64_t> counts,
                                double threshold = 0.5) {
  std::uint64_t total = 0;
  for (const auto c : counts) total += c;
  if (total == 0) return 0;
  std::vector<std::uint64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const long double bar = static_cast<long double>(threshold) * total;
  std::uint64_t prefix = 0;
  int nc = 0;
  for (const auto c : sorted) {
    ++nc;
    prefix += c;
    if (static_cast<long double>(prefix) > bar) break;
  }
  return nc;
}

inline int nakamoto_coefficient(const std::map<std::string, std::uint64_t>& counts,
                                double threshold = 0.5) {
  std::vector<std::uint64_t> v;
  v.reserve(counts.size());
  for (const auto& [name, c] : counts) v.push_back(c);
  return nakamoto_coefficient(v, threshold);
}

/// Shares s_i >= 0 with sum 1 (within 1e-12).
class ShareVector {
 public:
  static ShareVector from_counts(std::span<const std::uint64_t> counts) {
    std::uint64_t total = 0;
    for (const auto c : counts) total += c;
    ShareVector s;
    if (total == 0) return s;
    s.shares_.reserve(counts.size());
    for (const auto c : counts) {
      s.shares_.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return s;
  }

  static ShareVector from_counts(const std::map<std::string, std::uint64_t>& counts) {
    std::vector<std::uint64_t> v;
    for (const auto& [name, c] : counts) v.push_back(c);
    return from_counts(v);
  }

  static ShareVector from_shares(std::vector<double> shares) {
    long double sum = 0;
    for (const double x : shares) {
      if (!(x >= 0.0) || x > 1.0) throw std::invalid_argument("share outside [0, 1]");
      sum += x;
    }
    if (!shares.empty() && std::fabs(static_cast<double>(sum) - 1.0) > 1e-12) {
      throw std::invalid_argument("shares must sum to 1");
    }
    ShareVector s;
    s.shares_ = std::move(shares);
    return s;
  }

  bool empty() const { return shares_.empty(); }
  std::size_t size() const { return shares_.size(); }
  std::span<const double> values() const { return shares_; }

 private:
  std::vector<double> shares_;
};

/// Herfindahl-Hirschman index on the percentage scale, in (0, 10000].
inline double hhi(const ShareVector& shares) {
  if (shares.empty()) throw std::invalid_argument("hhi: empty share vector");
  double sum = 0;
  for (const double s : shares.values()) sum += (100.0 * s) * (100.0 * s);
  return sum;
}

/// Shannon entropy in bits; zero shares contribute nothing.
inline double shannon_entropy(const ShareVector& shares) {
  if (shares.empty()) throw std::invalid_argument("shannon_entropy: empty share vector");
  double h = 0;
  for (const double s : shares.values()) {
    if (s > 0) h -= s * std::log2(s);
  }
  return h;
}

/// Gini coefficient, mean-difference form over shares sorted ascending:
/// G = sum_i (2i - n - 1) s_i / n. Zero for perfect equality.
inline double gini(const ShareVector& shares) {
  if (shares.empty()) throw std::invalid_argument("gini: empty share vector");
  std::vector<double> s(shares.values().begin(), shares.values().end());
  std::sort(s.begin(), s.end());
  const auto n = static_cast<double>(s.size());
  double acc = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    acc += (2.0 * static_cast<double>(i + 1) - n - 1.0) * s[i];
  }
  return std::max(0.0, acc / n);
}

struct Nc1Bounds {
  double hhi_threshold;
  double gini_floor;
};

/// Values any NC = 1 distribution over `n` holders must exceed (HHI) or meet
/// (Gini, for one majority holder with the rest split equally).
inline Nc1Bounds nc1_bounds(int n) {
  if (n < 2) throw std::invalid_argument("nc1_bounds: need at least 2 holders");
  return {2500.0, 0.5 - 1.0 / n};
}

struct MetricValues {
  int nc = 0;
  double hhi = 0;
  double entropy_bits = 0;
  double gini = 0;
};

inline MetricValues compute_metrics(const std::map<std::string, std::uint64_t>& counts) {
  MetricValues m;
  m.nc = nakamoto_coefficient(counts);
  const auto shares = ShareVector::from_counts(counts);
  if (shares.empty()) return m;
  m.hhi = hhi(shares);
  m.entropy_bits = shannon_entropy(shares);
  m.gini = gini(shares);
  return m;
}

}  // namespace ncstat
