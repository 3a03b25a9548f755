// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "ncstat/attribution.hpp"

using namespace ncstat;

namespace {

std::ifstream data(const std::string& name) {
  return std::ifstream(std::string(NCSTAT_TEST_DATA_DIR) + "/" + name, std::ios::binary);
}

AttributionRules rules_from(const std::string& tags, const std::string& addresses,
                            const std::string& clusters) {
  std::istringstream t(tags), a(addresses), c(clusters);
  return load_rules(t, a, c);
}

BlockRecord block(std::uint64_t height, std::string address, std::string tag) {
  return {"btc", height, 1546300800, std::move(address), std::move(tag)};
}

}  // namespace

TEST_CASE("empty rule files give empty rules") {
  const auto r = rules_from("[]", "{}", "[]");
  CHECK(r.tag_rules().empty());
  CHECK(r.address_rules().empty());
  CHECK(r.clusters().empty());
  const auto blank = rules_from("", "", "");
  CHECK(blank.tag_rules().empty());
}

TEST_CASE("fixture rule files load with expected counts") {
  auto t = data("tags.json");
  auto a = data("addresses.json");
  auto c = data("clusters.json");
  const auto r = load_rules(t, a, c);
  CHECK(r.tag_rules().size() == 2);
  CHECK(r.address_rules().size() == 3);
  CHECK(r.clusters().size() == 1);
  CHECK(r.tag_rules()[0].pattern == "/F2Pool/");
}

TEST_CASE("entity in two clusters is rejected by name") {
  try {
    rules_from("[]", "{}",
               R"([{"canonical":"P","members":["X","Y"]},{"canonical":"Q","members":["X"]}])");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("'X'") != std::string::npos);
  }
}

TEST_CASE("rule file errors carry a path") {
  auto message = [](const std::string& t, const std::string& a, const std::string& c) {
    try {
      rules_from(t, a, c);
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"([{"pattern":"/A/","entity":"A"},{"pattern":3,"entity":"B"}])", "{}", "[]")
            .find("tags[1].pattern") != std::string::npos);
  CHECK(message(R"([{"pattern":"","entity":"A"}])", "{}", "[]").find("tags[0].pattern") !=
        std::string::npos);
  CHECK(message("[", "{}", "[]").rfind("tags:", 0) == 0);
  CHECK(message("[]", R"({"a": 1})", "[]").find("addresses[\"a\"]") != std::string::npos);
  CHECK(message("[]", "{}", R"([{"canonical":"C"}])").find("clusters[0].members") !=
        std::string::npos);
  CHECK(message("[]", "{}",
                R"([{"canonical":"C","members":["a"]},{"canonical":"C","members":["b"]}])")
            .find("duplicate canonical") != std::string::npos);
  CHECK(message("[]", "{}",
                R"([{"canonical":"C","members":["a"]},{"canonical":"D","members":["C"]}])")
            .find("canonical name 'C'") != std::string::npos);
}

TEST_CASE("synthetic fallback and substring matching") {
  const AttributionRules empty;
  CHECK(attribute_block(block(1, "addr1", ""), empty) == EntityId{"addr1", true});
  CHECK(attribute_block(block(42, "", "whatever"), empty) == EntityId{"height:42", true});

  const auto r = AttributionRules::make({{"/Foo/", "FooPool"}}, {}, {});
  CHECK(attribute_block(block(1, "a", "/Foo/mined"), r) == EntityId{"FooPool", false});
  CHECK(attribute_block(block(1, "a", "/foo/mined"), r) == EntityId{"a", true});
}

TEST_CASE("tag match is merged through its cluster") {
  const auto r = AttributionRules::make({{"/A/", "A"}}, {}, {{"AB", {"A", "B"}}});
  CHECK(attribute_block(block(1, "x", "/A/xyz"), r) == EntityId{"AB", false});
}

TEST_CASE("clusters never absorb synthetic entities") {
  const auto r = AttributionRules::make({}, {}, {{"AB", {"addr-A", "B"}}});
  CHECK(attribute_block(block(1, "addr-A", ""), r) == EntityId{"addr-A", true});
}

TEST_CASE("tag beats address, first tag rule wins") {
  const auto r = AttributionRules::make({{"/One/", "One"}, {"/Two/", "Two"}},
                                        {{"addr", "ByAddress"}}, {});
  CHECK(attribute_block(block(1, "addr", "/Two/"), r).name == "Two");
  CHECK(attribute_block(block(1, "addr", "/Two//One/"), r).name == "One");
  CHECK(attribute_block(block(1, "addr", "none"), r).name == "ByAddress");

  const auto swapped = AttributionRules::make({{"/Two/", "Two"}, {"/One/", "One"}},
                                              {{"addr", "ByAddress"}}, {});
  CHECK(attribute_block(block(1, "addr", "/Two//One/"), swapped).name == "Two");
}

TEST_CASE("canonicalization is idempotent") {
  const auto r = AttributionRules::make(
      {}, {}, {{"AB", {"A", "B", "AB"}}, {"CD", {"C", "D"}}});
  for (const std::string e : {"A", "B", "AB", "C", "D", "CD", "E"}) {
    CHECK(r.canonicalize(r.canonicalize(e)) == r.canonicalize(e));
  }
}

TEST_CASE("attribution is total and never yields an empty name") {
  std::mt19937_64 rng(7);
  const auto r = AttributionRules::make({{"/P/", "P"}, {"Q", "Q"}},
                                        {{"a1", "A"}, {"a2", "P"}}, {{"PQ", {"P", "Q"}}});
  const std::vector<std::string> addresses{"", "a1", "a2", "a3"};
  const std::vector<std::string> tags{"", "/P/", "xQx", "zz"};
  for (int i = 0; i < 500; ++i) {
    const auto e = attribute_block(
        block(rng() % 1000, addresses[rng() % addresses.size()], tags[rng() % tags.size()]), r);
    CHECK_FALSE(e.name.empty());
  }
}

TEST_CASE("address map order does not matter") {
  std::map<std::string, std::string> book;
  std::vector<std::pair<std::string, std::string>> entries{{"a", "A"}, {"b", "B"}, {"c", "C"}};
  std::mt19937 rng(3);
  const auto probe = block(1, "b", "");
  std::string first;
  for (int i = 0; i < 6; ++i) {
    std::shuffle(entries.begin(), entries.end(), rng);
    std::map<std::string, std::string> m;
    for (const auto& [k, v] : entries) m.emplace(k, v);
    const auto name = attribute_block(probe, AttributionRules::make({}, m, {})).name;
    if (i == 0) first = name;
    CHECK(name == first);
  }
}

TEST_CASE("dataset attribution counters") {
  const BlockDataset empty;
  const auto none = attribute_dataset(empty, AttributionRules{});
  CHECK(none.blocks.empty());
  CHECK(none.summary == AttributionSummary{});

  BlockDataset all_tagged;
  for (std::uint64_t h = 0; h < 5; ++h) all_tagged.records.push_back(block(h, "", "/A/"));
  const auto tagged =
      attribute_dataset(all_tagged, AttributionRules::make({{"/A/", "A"}}, {}, {}));
  CHECK(tagged.summary.by_tag == 5);

  std::ifstream in(std::string(NCSTAT_TEST_DATA_DIR) + "/attribution10.csv");
  const auto dataset = parse_blocks(in, BlockFormat::kCsv).dataset;
  auto t = data("tags.json");
  auto a = data("addresses.json");
  auto c = data("clusters.json");
  const auto result = attribute_dataset(dataset, load_rules(t, a, c));
  CHECK(result.summary == AttributionSummary{4, 3, 0, 3});
  REQUIRE(result.blocks.size() == 10);
  CHECK(result.blocks[9].entity == EntityId{"height:10", true});
  CHECK(result.blocks[5].entity.name == "ViaBTC");
}

TEST_CASE("cluster merges are counted") {
  auto t = data("tags.json");
  auto a = data("addresses.json");
  auto c = data("clusters.json");
  const auto rules = load_rules(t, a, c);
  BlockDataset d;
  d.records = {block(1, "z", "/AntPool/"), block(2, "addrC", ""), block(3, "addrD", "")};
  const auto result = attribute_dataset(d, rules);
  CHECK(result.summary == AttributionSummary{1, 2, 2, 0});
  CHECK(result.blocks[0].entity.name == "Bitmain");
  CHECK(result.blocks[1].entity.name == "Bitmain");
  CHECK(result.blocks[2].entity.name == "ViaBTC");
}
