// SPDX-License-Identifier: Apache-2.0
#include <sstream>

#include "catch_amalgamated.hpp"
#include "ncstat/report.hpp"
#include "ncstat/simulate.hpp"
#include "oracles/nc_range_bruteforce.hpp"

using namespace ncstat;
using namespace std::chrono;

namespace {

const Date kStart = year{2019} / January / 1;

DailyMatrix two_day_matrix() {
  // day 0: A dominates; day 1: nothing mined
  return DailyMatrix(kStart, {"A", "B", "C"}, {{120, 20, 6}, {0, 0, 0}});
}

std::string csv_of(const Table& t) {
  std::ostringstream out;
  write_csv(t, out);
  return out.str();
}

}  // namespace

TEST_CASE("dominated day gives a tight range that passes") {
  const auto rows = analyze(two_day_matrix(), 1, {});
  REQUIRE(rows.size() == 2);
  const auto& r = rows[0];
  CHECK(r.start_date == kStart);
  CHECK(r.n == 146);
  CHECK(r.direct_nc == 1);
  CHECK(r.lower == 1);
  CHECK(r.upper == 1);
  CHECK(r.passes);
  CHECK_FALSE(r.indeterminate);
  CHECK_FALSE(r.lower_than_direct());
}

TEST_CASE("empty day is indeterminate and renders empty cells") {
  const auto rows = analyze(two_day_matrix(), 1, {});
  CHECK(rows[1].indeterminate);
  CHECK_FALSE(rows[1].passes);
  CHECK(rows[1].n == 0);
  const std::string csv = csv_of(analysis_table(rows));
  CHECK(csv.starts_with("start_date,n,direct_nc,lower,upper,p_greater,passes,indeterminate\n"));
  CHECK(csv.find("2019-01-02,0,,,,,false,true") != std::string::npos);
}

TEST_CASE("row count is days minus width plus one") {
  const PowerVector pv({0.3, 0.25, 0.2, 0.15, 0.1});
  const auto m = simulate_daily_matrix(pv, 146, 20, 1, kStart);
  for (int w : {1, 3, 7, 14, 20}) {
    const auto rows = analyze(m, w, {});
    CHECK(rows.size() == static_cast<std::size_t>(20 - w + 1));
    CHECK(rows.front().start_date == kStart);
    CHECK(rows.back().start_date == kStart + days{20 - w});
    CHECK(rows.front().n == 146u * static_cast<unsigned>(w));
  }
  CHECK(analyze(m, 21, {}).empty());
  CHECK_THROWS_AS(analyze(m, 0, {}), std::invalid_argument);
}

TEST_CASE("analysis over a simulated fortnight agrees with brute force") {
  const PowerVector pv({0.22, 0.18, 0.15, 0.12, 0.1, 0.08, 0.06, 0.05, 0.04});
  const auto m = simulate_daily_matrix(pv, 146, 14, 99, kStart);
  for (double alpha : {0.01, 0.05, 0.1}) {
    for (int w : {1, 3, 7}) {
      const auto wins = windows(m, w);
      const auto rows = analyze(m, w, {alpha, 0.5});
      REQUIRE(rows.size() == wins.size());
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::uint64_t> counts;
        for (const auto& [name, c] : wins[i].counts) counts.push_back(c);
        const auto brute = oracle::brute_nc_range(counts, alpha);
        INFO("alpha " << alpha << " w " << w << " window " << i);
        CHECK(rows[i].direct_nc == brute.direct);
        CHECK(rows[i].lower == brute.lower);
        CHECK(rows[i].upper == brute.upper);
      }
    }
  }
}

TEST_CASE("listing-compatible ranges match clean ranges at one half") {
  const PowerVector pv({0.26, 0.2, 0.17, 0.14, 0.12, 0.11});
  const auto m = simulate_daily_matrix(pv, 146, 30, 8, kStart);
  for (int w : {1, 2, 5}) {
    const auto clean = analyze(m, w, {}, RangeMode::kClean);
    const auto listing = analyze(m, w, {}, RangeMode::kListingCompat);
    for (std::size_t i = 0; i < clean.size(); ++i) {
      CHECK(clean[i].lower == listing[i].lower);
      CHECK(clean[i].upper == listing[i].upper);
    }
  }
}

TEST_CASE("one-cell sweep equals the pass rate") {
  const PowerVector pv({0.3, 0.25, 0.2, 0.15, 0.1});
  const auto m = simulate_daily_matrix(pv, 146, 40, 3, kStart);
  const std::vector<int> g{7};
  const std::vector<double> a{0.05};
  const auto cells = sweep(m, g, a, {});
  REQUIRE(cells.size() == 1);
  const auto rate = pass_rate(windows(m, 7), {0.05, 0.5});
  CHECK(cells[0].pass_fraction == rate.fraction);
  CHECK(cells[0].window_count == rate.evaluated);
  CHECK(cells[0].granularity_days == 7);
}

TEST_CASE("sweep is granularity-major and monotone in alpha") {
  const PowerVector pv({0.3, 0.25, 0.2, 0.15, 0.1});
  const auto m = simulate_daily_matrix(pv, 146, 60, 4, kStart);
  const std::vector<int> g{1, 3, 7, 14};
  const std::vector<double> a{0.001, 0.01, 0.05, 0.1};
  const auto cells = sweep(m, g, a, {});
  REQUIRE(cells.size() == 16);
  for (std::size_t gi = 0; gi < g.size(); ++gi) {
    for (std::size_t ai = 0; ai < a.size(); ++ai) {
      const auto& c = cells[gi * a.size() + ai];
      CHECK(c.granularity_days == g[gi]);
      CHECK(c.alpha == a[ai]);
      if (ai > 0) CHECK(c.pass_fraction >= cells[gi * a.size() + ai - 1].pass_fraction);
    }
  }
}

TEST_CASE("sweep errors propagate") {
  const auto m = two_day_matrix();
  const std::vector<int> g{1};
  const std::vector<double> bad{1.5};
  CHECK_THROWS_AS(sweep(m, g, bad, {}), std::invalid_argument);
  const std::vector<int> none;
  const std::vector<double> a{0.05};
  CHECK_THROWS_AS(sweep(m, none, a, {}), std::invalid_argument);
  // every window empty
  const DailyMatrix empty(kStart, {"A"}, {{0}, {0}});
  CHECK_THROWS_AS(sweep(empty, g, a, {}), std::invalid_argument);
}

TEST_CASE("tables render identically on rerun") {
  const PowerVector pv({0.4, 0.35, 0.25});
  const auto m1 = simulate_daily_matrix(pv, 146, 10, 21, kStart);
  const auto m2 = simulate_daily_matrix(pv, 146, 10, 21, kStart);
  CHECK(csv_of(analysis_table(analyze(m1, 3, {}))) == csv_of(analysis_table(analyze(m2, 3, {}))));
  const std::vector<int> g{1, 3};
  const std::vector<double> a{0.05, 0.1};
  CHECK(csv_of(sweep_table(sweep(m1, g, a, {}))) == csv_of(sweep_table(sweep(m2, g, a, {}))));
  CHECK(csv_of(metrics_table(windows(m1, 2))) == csv_of(metrics_table(windows(m2, 2))));
}

TEST_CASE("metrics table") {
  const auto t = metrics_table(windows(two_day_matrix(), 1));
  CHECK(t.columns == std::vector<std::string>{"start_date", "n", "nc", "hhi", "entropy_bits", "gini"});
  REQUIRE(t.rows.size() == 2);
  CHECK(std::get<std::int64_t>(t.rows[0][2]) == 1);
  CHECK(std::holds_alternative<double>(t.rows[0][3]));
  CHECK(std::holds_alternative<std::monostate>(t.rows[1][3]));
  CHECK(std::get<std::int64_t>(t.rows[1][2]) == 0);
}

TEST_CASE("json rendering uses column keys and null for missing cells") {
  const auto j = to_json(analysis_table(analyze(two_day_matrix(), 1, {})));
  REQUIRE(j.size() == 2);
  CHECK(j[0]["direct_nc"] == 1);
  CHECK(j[0]["start_date"] == "2019-01-01");
  CHECK(j[1]["direct_nc"].is_null());
  CHECK(j[1]["indeterminate"] == true);
}
