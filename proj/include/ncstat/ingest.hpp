// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncstat/csv.hpp"
#include "ncstat/error.hpp"
#include "ncstat/timestamp.hpp"

namespace ncstat {

/// One mined block as exported from a chain.
struct BlockRecord {
  std::string ledger;
  std::uint64_t height = 0;
  UnixSeconds timestamp = 0;
  std::string reward_address;  // may be empty
  std::string tag;             // coinbase parameter or similar; may be empty

  friend bool operator==(const BlockRecord&, const BlockRecord&) = default;
};

/// All blocks of one ledger, sorted by (timestamp, height), unique heights.
struct BlockDataset {
  std::string ledger;
  std::vector<BlockRecord> records;
  std::string source_digest;  // FNV-1a 64 of the input bytes, hex

  /// Field-by-field equality of the ledger and records. The digest describes
  /// the bytes a dataset came from, so it is not part of identity.
  bool same_content(const BlockDataset& other) const {
    return ledger == other.ledger && records == other.records;
  }
};

enum class BlockFormat { kCsv, kJsonl };

struct ParseReport {
  BlockDataset dataset;
  std::size_t rows_read = 0;
  std::size_t duplicates_dropped = 0;
  std::vector<std::string> warnings;
};

inline constexpr std::string_view kBlockCsvHeader =
    "ledger,height,timestamp,reward_address,tag";

namespace detail {

inline std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline bool parse_height(std::string_view s, std::uint64_t& out) {
  if (s.empty() || s.size() > 20) return false;
  std::uint64_t v = 0;
  for (const char c : s) {
    if (c < '0' || c > '9') return false;
    const std::uint64_t d = static_cast<std::uint64_t>(c - '0');
    if (v > (UINT64_MAX - d) / 10) return false;
    v = v * 10 + d;
  }
  out = v;
  return true;
}

}  // namespace detail

/// Replaces every byte that is not part of a well-formed UTF-8 sequence with
/// the four characters `\xNN` (lowercase hex). Valid input is returned as is.
inline std::string sanitize_utf8(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  const auto* s = reinterpret_cast<const unsigned char*>(in.data());
  const std::size_t n = in.size();
  std::size_t i = 0;
  auto escape = [&](unsigned char b) {
    static constexpr char kHex[] = "0123456789abcdef";
    out += "\\x";
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  };
  while (i < n) {
    const unsigned char c = s[i];
    std::size_t len = 0;
    std::uint32_t min_cp = 0;
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      len = 2;
      min_cp = 0x80;
    } else if ((c & 0xf0) == 0xe0) {
      len = 3;
      min_cp = 0x800;
    } else if ((c & 0xf8) == 0xf0) {
      len = 4;
      min_cp = 0x10000;
    }
    bool ok = len != 0 && i + len <= n;
    std::uint32_t cp = 0;
    if (ok) {
      cp = c & (0x7f >> len);
      for (std::size_t j = 1; j < len; ++j) {
        if ((s[i + j] & 0xc0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (s[i + j] & 0x3f);
      }
    }
    ok = ok && cp >= min_cp && cp <= 0x10ffff && !(cp >= 0xd800 && cp <= 0xdfff);
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      escape(c);
      ++i;
    }
  }
  return out;
}

namespace detail {

struct RawRow {
  std::size_t line;
  BlockRecord record;
};

inline BlockRecord make_record(std::size_t line, std::string_view ledger,
                               std::string_view height, std::string_view ts,
                               std::string_view address, std::string_view tag) {
  BlockRecord r;
  if (ledger.empty()) throw ParseError(line, "ledger", "empty ledger");
  r.ledger = sanitize_utf8(ledger);
  if (!parse_height(height, r.height)) {
    throw ParseError(line, "height",
                     "expected a non-negative integer, got '" +
                         std::string(height) + "'");
  }
  const auto t = parse_timestamp(ts);
  if (!t) {
    throw ParseError(line, "timestamp",
                     "unparseable UTC timestamp '" + std::string(ts) + "'");
  }
  r.timestamp = *t;
  r.reward_address = sanitize_utf8(address);
  r.tag = sanitize_utf8(tag);
  return r;
}

inline std::vector<RawRow> read_csv_rows(std::istream& in) {
  csv::Reader reader(in);
  std::vector<RawRow> rows;
  auto header = reader.next();
  if (!header) throw ParseError(1, "header", "missing header row");
  std::string joined;
  for (std::size_t i = 0; i < header->fields.size(); ++i) {
    if (i) joined += ',';
    joined += header->fields[i];
  }
  if (!joined.empty() && joined.rfind("\xef\xbb\xbf", 0) == 0) joined.erase(0, 3);
  if (joined != kBlockCsvHeader) {
    throw ParseError(header->line, "header",
                     "expected '" + std::string(kBlockCsvHeader) + "', got '" +
                         joined + "'");
  }
  while (auto row = reader.next()) {
    auto& f = row->fields;
    if (f.size() != 5) {
      throw ParseError(row->line, "row",
                       "expected 5 fields, got " + std::to_string(f.size()));
    }
    rows.push_back({row->line, make_record(row->line, f[0], f[1], f[2], f[3], f[4])});
  }
  return rows;
}

inline std::string json_string_field(const nlohmann::json& obj, std::size_t line,
                                     const char* key, bool nullable) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, key, "missing key");
  if (it->is_string()) return it->get<std::string>();
  if (nullable && it->is_null()) return {};
  throw ParseError(line, key, "expected a string");
}

inline std::vector<RawRow> read_jsonl_rows(std::istream& in) {
  std::vector<RawRow> rows;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line, "json", e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "json", "expected an object");
    std::string height;
    const auto h = obj.find("height");
    if (h == obj.end()) throw ParseError(line, "height", "missing key");
    if (h->is_number_unsigned()) {
      height = std::to_string(h->get<std::uint64_t>());
    } else if (h->is_string()) {
      height = h->get<std::string>();
    } else {
      throw ParseError(line, "height", "expected a non-negative integer");
    }
    rows.push_back(
        {line, make_record(line, json_string_field(obj, line, "ledger", false), height,
                           json_string_field(obj, line, "timestamp", false),
                           json_string_field(obj, line, "reward_address", true),
                           json_string_field(obj, line, "tag", true))});
  }
  return rows;
}

}  // namespace detail

/// Parses a block export. Rows are sorted by (timestamp, height). When a
/// height repeats, the later row wins; conflicting payloads add a warning.
/// Throws ParseError for malformed rows and DataError when the file mixes
/// ledgers.
inline ParseReport parse_blocks(std::istream& in, BlockFormat format) {
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  std::istringstream body(bytes);
  std::vector<detail::RawRow> rows = format == BlockFormat::kCsv
                                         ? detail::read_csv_rows(body)
                                         : detail::read_jsonl_rows(body);

  ParseReport report;
  report.rows_read = rows.size();
  report.dataset.source_digest = detail::fnv1a_hex(bytes);

  std::unordered_map<std::uint64_t, std::size_t> by_height;
  std::vector<BlockRecord> kept;
  std::vector<std::size_t> kept_line;
  for (auto& row : rows) {
    if (report.dataset.ledger.empty()) {
      report.dataset.ledger = row.record.ledger;
    } else if (row.record.ledger != report.dataset.ledger) {
      throw DataError("line " + std::to_string(row.line) + ": ledger '" +
                      row.record.ledger + "' differs from '" +
                      report.dataset.ledger + "'; one ledger per dataset");
    }
    const auto [it, inserted] = by_height.try_emplace(row.record.height, kept.size());
    if (inserted) {
      kept.push_back(std::move(row.record));
      kept_line.push_back(row.line);
      continue;
    }
    ++report.duplicates_dropped;
    BlockRecord& prev = kept[it->second];
    if (!(prev == row.record)) {
      report.warnings.push_back("line " + std::to_string(row.line) +
                                ": duplicate height " +
                                std::to_string(row.record.height) +
                                " conflicts with line " +
                                std::to_string(kept_line[it->second]) +
                                "; keeping the later row");
    }
    prev = std::move(row.record);
    kept_line[it->second] = row.line;
  }
  std::sort(kept.begin(), kept.end(), [](const BlockRecord& a, const BlockRecord& b) {
    return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.height < b.height;
  });
  report.dataset.records = std::move(kept);
  return report;
}

/// Writes the canonical CSV form (LF endings, RFC-4180 quoting) and returns
/// the number of data rows.
inline std::size_t write_normalized(const BlockDataset& dataset, std::ostream& out) {
  out << kBlockCsvHeader << '\n';
  for (const auto& r : dataset.records) {
    csv::write_row(out, {r.ledger, std::to_string(r.height),
                         format_timestamp(r.timestamp), r.reward_address, r.tag});
  }
  out.flush();
  if (!out) throw DataError("failed writing normalized block file");
  return dataset.records.size();
}

}  // namespace ncstat
