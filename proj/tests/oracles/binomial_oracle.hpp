// SPDX-License-Identifier: Apache-2.0
//
// Reference binomial tails by exhaustive summation of the pmf in 100-digit
// binary floating point. Slow and simple; shares no code with the library.
#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace ncstat::oracle {

using Big = boost::multiprecision::cpp_bin_float_100;

/// All cumulative tails of Binomial(n, t).
class BinomialTable {
 public:
  BinomialTable(std::uint64_t n, double t) : n_(n) {
    const Big p(t);
    const Big q = Big(1) - p;
    std::vector<Big> pmf(n + 1);
    pmf[0] = boost::multiprecision::pow(q, static_cast<long long>(n));
    for (std::uint64_t k = 0; k < n; ++k) {
      pmf[k + 1] = pmf[k] * Big(n - k) / Big(k + 1) * p / q;
    }
    lower_.resize(n + 1);
    upper_.resize(n + 2);
    Big acc = 0;
    for (std::uint64_t k = 0; k <= n; ++k) {
      acc += pmf[k];
      lower_[k] = acc;
    }
    acc = 0;
    upper_[n + 1] = 0;
    for (std::uint64_t k = n + 1; k-- > 0;) {
      acc += pmf[k];
      upper_[k] = acc;
    }
  }

  /// P(X >= k)
  const Big& upper(std::uint64_t k) const { return upper_.at(k); }
  /// P(X <= k)
  const Big& lower(std::uint64_t k) const { return lower_.at(k); }
  std::uint64_t n() const { return n_; }

 private:
  std::uint64_t n_;
  std::vector<Big> lower_;
  std::vector<Big> upper_;
};

}  // namespace ncstat::oracle

namespace ncstat::oracle {

/// P(X >= k) (upper) or P(X <= k) for large n: the pmf at k comes from
/// multiprecision lgamma, and terms are summed outward until they fall
/// below 1e-40 of the running sum past the mode.
inline Big sparse_tail(std::uint64_t k, std::uint64_t n, double t, bool upper) {
  using boost::multiprecision::exp;
  using boost::multiprecision::lgamma;
  using boost::multiprecision::log;
  const Big p(t);
  const Big q = Big(1) - p;
  const Big bn(n), bk(k);
  Big term = exp(lgamma(bn + 1) - lgamma(bk + 1) - lgamma(bn - bk + 1) + bk * log(p) +
                 (bn - bk) * log(q));
  Big sum = term;
  const Big tiny("1e-40");
  if (upper) {
    for (std::uint64_t j = k; j < n; ++j) {
      term = term * Big(n - j) / Big(j + 1) * p / q;
      sum += term;
      if (Big(j) > bn * p && term < sum * tiny) break;
    }
  } else {
    for (std::uint64_t j = k; j > 0; --j) {
      term = term * Big(j) / Big(n - j + 1) * q / p;
      sum += term;
      if (Big(j) < bn * p && term < sum * tiny) break;
    }
  }
  return sum;
}

}  // namespace ncstat::oracle
