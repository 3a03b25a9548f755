// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <istream>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncstat/error.hpp"
#include "ncstat/ingest.hpp"

namespace ncstat {

/// Who produced a block. Synthetic entities stand in for blocks that no rule
/// matched; they are named by reward address, or `height:<h>`.
struct EntityId {
  std::string name;
  bool synthetic = false;

  friend bool operator==(const EntityId&, const EntityId&) = default;
};

struct TagRule {
  std::string pattern;
  std::string entity;
};

struct Cluster {
  std::string canonical;
  std::set<std::string> members;
};

/// Rules for mapping blocks to entities. Construct through `make` or
/// `load_rules`, which enforce the invariants: non-empty patterns, pairwise
/// disjoint cluster members, unique canonical names, and no canonical name
/// that is a member of another cluster (so canonicalization is idempotent).
class AttributionRules {
 public:
  AttributionRules() = default;

  static AttributionRules make(std::vector<TagRule> tags,
                               std::map<std::string, std::string> addresses,
                               std::vector<Cluster> clusters) {
    AttributionRules rules;
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (tags[i].pattern.empty()) {
        throw DataError("tags[" + std::to_string(i) + "].pattern: empty pattern");
      }
      if (tags[i].entity.empty()) {
        throw DataError("tags[" + std::to_string(i) + "].entity: empty entity");
      }
    }
    for (const auto& [address, entity] : addresses) {
      if (entity.empty()) {
        throw DataError("addresses[\"" + address + "\"]: empty entity");
      }
    }
    std::set<std::string> canonicals;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const auto& c = clusters[i];
      if (c.canonical.empty()) {
        throw DataError("clusters[" + std::to_string(i) + "].canonical: empty name");
      }
      if (!canonicals.insert(c.canonical).second) {
        throw DataError("clusters[" + std::to_string(i) +
                        "].canonical: duplicate canonical name '" + c.canonical + "'");
      }
      for (const auto& m : c.members) {
        if (m.empty()) {
          throw DataError("clusters[" + std::to_string(i) + "].members: empty name");
        }
        const auto [it, inserted] = rules.member_of_.emplace(m, c.canonical);
        if (!inserted) {
          throw DataError("clusters[" + std::to_string(i) + "].members: entity '" + m +
                          "' already belongs to cluster '" + it->second + "'");
        }
      }
    }
    for (const auto& c : clusters) {
      const auto it = rules.member_of_.find(c.canonical);
      if (it != rules.member_of_.end() && it->second != c.canonical) {
        throw DataError("clusters: canonical name '" + c.canonical +
                        "' is a member of cluster '" + it->second + "'");
      }
    }
    rules.tags_ = std::move(tags);
    rules.addresses_ = std::move(addresses);
    rules.clusters_ = std::move(clusters);
    return rules;
  }

  const std::vector<TagRule>& tag_rules() const { return tags_; }
  const std::map<std::string, std::string>& address_rules() const { return addresses_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }

  /// Canonical name for a matched entity; names outside every cluster are
  /// returned unchanged.
  const std::string& canonicalize(const std::string& entity) const {
    const auto it = member_of_.find(entity);
    return it == member_of_.end() ? entity : it->second;
  }

  bool in_cluster(const std::string& entity) const { return member_of_.count(entity) > 0; }

 private:
  std::vector<TagRule> tags_;
  std::map<std::string, std::string> addresses_;
  std::vector<Cluster> clusters_;
  std::map<std::string, std::string> member_of_;
};

namespace detail {

inline nlohmann::json parse_rules_json(std::istream& in, const std::string& what) {
  const std::string text{std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>()};
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return nullptr;
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(what + ": " + e.what());
  }
}

inline std::string rules_string(const nlohmann::json& obj, const std::string& path,
                                const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw DataError(path + "." + key + ": missing");
  if (!it->is_string()) throw DataError(path + "." + key + ": expected a string");
  return it->get<std::string>();
}

}  // namespace detail

/// Reads the three rule files. An empty stream stands for an empty rule set.
///   tags:      [{"pattern": "...", "entity": "..."}, ...]   (ordered)
///   addresses: {"<address>": "<entity>", ...}
///   clusters:  [{"canonical": "...", "members": ["...", ...]}, ...]
inline AttributionRules load_rules(std::istream& tag_file, std::istream& address_file,
                                   std::istream& cluster_file) {
  std::vector<TagRule> tags;
  const auto tj = detail::parse_rules_json(tag_file, "tags");
  if (!tj.is_null()) {
    if (!tj.is_array()) throw DataError("tags: expected an array");
    for (std::size_t i = 0; i < tj.size(); ++i) {
      const std::string path = "tags[" + std::to_string(i) + "]";
      if (!tj[i].is_object()) throw DataError(path + ": expected an object");
      tags.push_back({detail::rules_string(tj[i], path, "pattern"),
                      detail::rules_string(tj[i], path, "entity")});
    }
  }

  std::map<std::string, std::string> addresses;
  const auto aj = detail::parse_rules_json(address_file, "addresses");
  if (!aj.is_null()) {
    if (!aj.is_object()) throw DataError("addresses: expected an object");
    for (const auto& [address, entity] : aj.items()) {
      if (!entity.is_string()) {
        throw DataError("addresses[\"" + address + "\"]: expected a string");
      }
      addresses.emplace(address, entity.get<std::string>());
    }
  }

  std::vector<Cluster> clusters;
  const auto cj = detail::parse_rules_json(cluster_file, "clusters");
  if (!cj.is_null()) {
    if (!cj.is_array()) throw DataError("clusters: expected an array");
    for (std::size_t i = 0; i < cj.size(); ++i) {
      const std::string path = "clusters[" + std::to_string(i) + "]";
      if (!cj[i].is_object()) throw DataError(path + ": expected an object");
      Cluster c;
      c.canonical = detail::rules_string(cj[i], path, "canonical");
      const auto m = cj[i].find("members");
      if (m == cj[i].end() || !m->is_array()) {
        throw DataError(path + ".members: expected an array");
      }
      for (std::size_t j = 0; j < m->size(); ++j) {
        if (!(*m)[j].is_string()) {
          throw DataError(path + ".members[" + std::to_string(j) +
                          "]: expected a string");
        }
        c.members.insert((*m)[j].get<std::string>());
      }
      clusters.push_back(std::move(c));
    }
  }
  return AttributionRules::make(std::move(tags), std::move(addresses), std::move(clusters));
}

enum class AttributionMethod { kTag, kAddress, kSynthetic };

struct Attribution {
  EntityId entity;
  AttributionMethod method = AttributionMethod::kSynthetic;
  bool cluster_merged = false;
};

/// Full three-stage attribution: first tag rule whose pattern is a
/// case-sensitive substring of the tag, else the address book, else a
/// synthetic entity. Clusters then merge matched (non-synthetic) entities.
inline Attribution attribute_block_detailed(const BlockRecord& record,
                                            const AttributionRules& rules) {
  Attribution out;
  const std::string* matched = nullptr;
  if (!record.tag.empty()) {
    for (const auto& rule : rules.tag_rules()) {
      if (record.tag.find(rule.pattern) != std::string::npos) {
        matched = &rule.entity;
        out.method = AttributionMethod::kTag;
        break;
      }
    }
  }
  if (!matched && !record.reward_address.empty()) {
    const auto it = rules.address_rules().find(record.reward_address);
    if (it != rules.address_rules().end()) {
      matched = &it->second;
      out.method = AttributionMethod::kAddress;
    }
  }
  if (matched) {
    out.cluster_merged = rules.in_cluster(*matched);
    out.entity = {rules.canonicalize(*matched), false};
    return out;
  }
  out.entity = {record.reward_address.empty() ? "height:" + std::to_string(record.height)
                                              : record.reward_address,
                true};
  return out;
}

inline EntityId attribute_block(const BlockRecord& record, const AttributionRules& rules) {
  return attribute_block_detailed(record, rules).entity;
}

struct AttributionSummary {
  std::size_t by_tag = 0;
  std::size_t by_address = 0;
  std::size_t cluster_merged = 0;
  std::size_t synthetic = 0;

  friend bool operator==(const AttributionSummary&, const AttributionSummary&) = default;
};

struct AttributedBlock {
  BlockRecord record;
  EntityId entity;
};

struct AttributedDataset {
  std::vector<AttributedBlock> blocks;
  AttributionSummary summary;
};

inline AttributedDataset attribute_dataset(const BlockDataset& dataset,
                                           const AttributionRules& rules) {
  AttributedDataset out;
  out.blocks.reserve(dataset.records.size());
  for (const auto& record : dataset.records) {
    auto a = attribute_block_detailed(record, rules);
    switch (a.method) {
      case AttributionMethod::kTag: ++out.summary.by_tag; break;
      case AttributionMethod::kAddress: ++out.summary.by_address; break;
      case AttributionMethod::kSynthetic: ++out.summary.synthetic; break;
    }
    if (a.cluster_merged) ++out.summary.cluster_merged;
    out.blocks.push_back({record, std::move(a.entity)});
  }
  return out;
}

}  // namespace ncstat
