// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace ncstat {

/// Seconds since the Unix epoch, UTC.
using UnixSeconds = std::int64_t;
/// A UTC calendar date.
using Date = std::chrono::sys_days;

namespace detail {

inline bool parse_digits(std::string_view s, std::size_t pos, std::size_t len,
                         int& out) {
  if (pos + len > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

}  // namespace detail

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff...][Z|+00:00]`. A space is accepted in
/// place of `T`; a missing zone suffix is read as UTC. Fractional seconds are
/// truncated. Returns nullopt on anything else, including invalid calendar
/// dates and non-UTC offsets.
inline std::optional<UnixSeconds> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec;
  if (s.size() < 19) return std::nullopt;
  if (!detail::parse_digits(s, 0, 4, y) || s[4] != '-' ||
      !detail::parse_digits(s, 5, 2, mo) || s[7] != '-' ||
      !detail::parse_digits(s, 8, 2, d) || (s[10] != 'T' && s[10] != ' ') ||
      !detail::parse_digits(s, 11, 2, h) || s[13] != ':' ||
      !detail::parse_digits(s, 14, 2, mi) || s[16] != ':' ||
      !detail::parse_digits(s, 17, 2, sec)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t digits_start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == digits_start) return std::nullopt;
  }
  const std::string_view zone = s.substr(pos);
  if (!(zone.empty() || zone == "Z" || zone == "+00:00")) return std::nullopt;

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 59) return std::nullopt;
  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
  return tp.time_since_epoch().count();
}

/// Calendar date (UTC) containing the instant.
inline Date utc_date(UnixSeconds t) {
  using namespace std::chrono;
  return floor<days>(sys_seconds{seconds{t}});
}

inline std::string format_date(Date date) {
  using namespace std::chrono;
  const year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Canonical form: `YYYY-MM-DDTHH:MM:SSZ`.
inline std::string format_timestamp(UnixSeconds t) {
  using namespace std::chrono;
  const Date date = utc_date(t);
  const auto tod = hh_mm_ss<seconds>{sys_seconds{seconds{t}} - date};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(date).c_str(),
                static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

/// Parses `YYYY-MM-DD`.
inline std::optional<Date> parse_date(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d;
  if (s.size() != 10 || !detail::parse_digits(s, 0, 4, y) || s[4] != '-' ||
      !detail::parse_digits(s, 5, 2, mo) || s[7] != '-' ||
      !detail::parse_digits(s, 8, 2, d)) {
    return std::nullopt;
  }
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return sys_days{ymd};
}

}  // namespace ncstat
