// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver. Exit codes: 0 success, 1 usage error, 2 data error.
// Diagnostics go to the error stream; data goes to --output (or the output
// stream when --output is omitted or "-").
#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "ncstat/ncstat.hpp"

namespace ncstat::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

struct RunConfig {
  std::string input;
  std::string input_format = "auto";
  std::string tags, addresses, clusters;
  std::vector<int> granularities{1};
  std::vector<double> alphas{0.05};
  double threshold = 0.5;
  std::string range_mode = "clean";
  std::string output;
  std::string format = "csv";

  std::vector<double> powers;
  std::uint64_t blocks_per_day = 146;
  int window_days = 1;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 0;
  int coalition = 0;
  unsigned threads = 1;
};

/// Writes to a sibling temporary file and renames it into place, so `path`
/// is either absent, left as it was, or complete.
inline void write_file_atomically(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw DataError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw DataError("cannot move output into place at '" + path + "'");
  }
}

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return in;
}

inline BlockFormat block_format(const RunConfig& cfg) {
  if (cfg.input_format == "csv") return BlockFormat::kCsv;
  if (cfg.input_format == "jsonl") return BlockFormat::kJsonl;
  const auto ext = std::filesystem::path(cfg.input).extension().string();
  return ext == ".jsonl" || ext == ".ndjson" ? BlockFormat::kJsonl : BlockFormat::kCsv;
}

inline ParseReport read_blocks(const RunConfig& cfg, std::ostream& err) {
  auto in = open_input(cfg.input);
  ParseReport report;
  try {
    report = parse_blocks(in, block_format(cfg));
  } catch (const DataError& e) {
    throw DataError(cfg.input + ": " + e.what());
  }
  for (const auto& w : report.warnings) err << "warning: " << cfg.input << ": " << w << '\n';
  err << "read " << report.rows_read << " rows, kept " << report.dataset.records.size()
      << " blocks (" << report.duplicates_dropped << " duplicate heights)\n";
  return report;
}

inline AttributionRules read_rules(const RunConfig& cfg) {
  auto open_or_empty = [](const std::string& path) -> std::unique_ptr<std::istream> {
    if (path.empty()) return std::make_unique<std::istringstream>();
    auto in = std::make_unique<std::ifstream>(path, std::ios::binary);
    if (!*in) throw DataError("cannot open rules file '" + path + "'");
    return in;
  };
  auto tags = open_or_empty(cfg.tags);
  auto addresses = open_or_empty(cfg.addresses);
  auto clusters = open_or_empty(cfg.clusters);
  return load_rules(*tags, *addresses, *clusters);
}

inline AttributedDataset read_attributed(const RunConfig& cfg, std::ostream& err) {
  const auto report = read_blocks(cfg, err);
  const auto rules = read_rules(cfg);
  auto attributed = attribute_dataset(report.dataset, rules);
  const auto& s = attributed.summary;
  err << "attribution: tag=" << s.by_tag << " address=" << s.by_address
      << " cluster_merged=" << s.cluster_merged << " synthetic=" << s.synthetic << '\n';
  return attributed;
}

inline void emit(const RunConfig& cfg, const std::string& bytes, std::ostream& out) {
  if (cfg.output.empty() || cfg.output == "-") {
    out << bytes;
    out.flush();
  } else {
    write_file_atomically(cfg.output, bytes);
  }
}

inline std::string render(const Table& table, const std::string& format) {
  std::ostringstream os;
  if (format == "json") {
    write_json(table, os);
  } else {
    write_csv(table, os);
  }
  return os.str();
}

inline TestConfig test_config(const RunConfig& cfg, double alpha) {
  TestConfig t{alpha, cfg.threshold};
  t.validate();
  return t;
}

}  // namespace detail

/// Accepts values strictly inside (0, 1).
inline CLI::Validator open_unit_interval() {
  return CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0;
        if (!CLI::detail::lexical_cast(s, v) || !(v > 0.0 && v < 1.0)) {
          return "value " + s + " not in the open interval (0, 1)";
        }
        return {};
      },
      "(0,1)");
}

inline unsigned default_threads() {
  if (const char* env = std::getenv("NCSTAT_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Runs one subcommand. `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  cfg.threads = default_threads();

  CLI::App app{"Nakamoto coefficient estimation with exact binomial confidence ranges",
               "ncstat"};
  app.require_subcommand(1);

  const auto alpha_range = open_unit_interval();
  auto add_input = [&](CLI::App* sub) {
    sub->add_option("--input", cfg.input, "Block file (CSV or JSONL)")->required();
    sub->add_option("--input-format", cfg.input_format, "csv, jsonl or auto (by extension)")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
  };
  auto add_rules = [&](CLI::App* sub) {
    sub->add_option("--tags", cfg.tags, "Tag rules JSON (ordered array)");
    sub->add_option("--addresses", cfg.addresses, "Address book JSON object");
    sub->add_option("--clusters", cfg.clusters, "Cluster JSON array");
  };
  auto add_output = [&](CLI::App* sub, bool with_format) {
    sub->add_option("--output", cfg.output, "Output path (default: standard output)");
    if (with_format) {
      sub->add_option("--format", cfg.format, "csv or json")
          ->check(CLI::IsMember({"csv", "json"}));
    }
  };
  auto add_threshold = [&](CLI::App* sub) {
    sub->add_option("--threshold", cfg.threshold, "Attack threshold of the binomial test")
        ->check(open_unit_interval());
  };

  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a block export");
  add_input(ingest);
  add_output(ingest, false);

  auto* attribute = app.add_subcommand("attribute", "Attribute blocks to entities");
  add_input(attribute);
  add_rules(attribute);
  add_output(attribute, true);

  auto* analyze_cmd = app.add_subcommand("analyze", "Per-window direct NC and range");
  add_input(analyze_cmd);
  add_rules(analyze_cmd);
  add_output(analyze_cmd, true);
  add_threshold(analyze_cmd);
  int granularity = 1;
  double alpha = 0.05;
  analyze_cmd->add_option("--granularity", granularity, "Window length in days")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--alpha", alpha, "Significance level")->check(alpha_range);
  analyze_cmd->add_option("--range-mode", cfg.range_mode,
                          "clean, or listing: the first lower-tail p-value reuses the "
                          "last upper-scan count")
      ->check(CLI::IsMember({"clean", "listing"}));

  auto* sweep_cmd = app.add_subcommand("sweep", "Pass rates over granularity x alpha");
  add_input(sweep_cmd);
  add_rules(sweep_cmd);
  add_output(sweep_cmd, true);
  add_threshold(sweep_cmd);
  cfg.granularities = {1, 3, 7, 14, 30};
  sweep_cmd->add_option("--granularity", cfg.granularities, "Comma-separated window lengths")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--alpha", cfg.alphas, "Comma-separated significance levels")
      ->delimiter(',')
      ->check(alpha_range);

  auto* metrics_cmd = app.add_subcommand("metrics", "Per-window NC, HHI, entropy, Gini");
  add_input(metrics_cmd);
  add_rules(metrics_cmd);
  add_output(metrics_cmd, true);
  metrics_cmd->add_option("--granularity", granularity, "Window length in days")
      ->check(CLI::PositiveNumber);

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo calibration");
  simulate_cmd->add_option("--powers", cfg.powers, "Comma-separated true shares")
      ->delimiter(',')
      ->required();
  simulate_cmd->add_option("--blocks-per-day", cfg.blocks_per_day)->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--window-days", cfg.window_days)->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--trials", cfg.trials)->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--alpha", alpha, "Significance level")->check(alpha_range);
  simulate_cmd->add_option("--seed", cfg.seed);
  simulate_cmd->add_option("--coalition", cfg.coalition,
                           "Coalition size to test (default: true NC)")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--threads", cfg.threads, "Worker threads (env NCSTAT_THREADS)")
      ->check(CLI::PositiveNumber);
  add_threshold(simulate_cmd);
  add_output(simulate_cmd, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  try {
    if (ingest->parsed()) {
      const auto report = detail::read_blocks(cfg, err);
      std::ostringstream os;
      write_normalized(report.dataset, os);
      detail::emit(cfg, os.str(), out);
    } else if (attribute->parsed()) {
      const auto attributed = detail::read_attributed(cfg, err);
      Table t;
      t.columns = {"ledger", "height", "timestamp", "entity", "synthetic"};
      for (const auto& b : attributed.blocks) {
        t.rows.push_back({b.record.ledger, static_cast<std::int64_t>(b.record.height),
                          format_timestamp(b.record.timestamp), b.entity.name,
                          b.entity.synthetic});
      }
      detail::emit(cfg, detail::render(t, cfg.format), out);
    } else if (analyze_cmd->parsed()) {
      const auto test = detail::test_config(cfg, alpha);
      const auto attributed = detail::read_attributed(cfg, err);
      const auto matrix = build_daily_matrix(attributed.blocks);
      const auto mode =
          cfg.range_mode == "listing" ? RangeMode::kListingCompat : RangeMode::kClean;
      const auto rows = analyze(matrix, granularity, test, mode);
      detail::emit(cfg, detail::render(analysis_table(rows), cfg.format), out);
    } else if (sweep_cmd->parsed()) {
      const auto test = detail::test_config(cfg, cfg.alphas.front());
      const auto attributed = detail::read_attributed(cfg, err);
      const auto matrix = build_daily_matrix(attributed.blocks);
      const auto cells = sweep(matrix, cfg.granularities, cfg.alphas, test);
      detail::emit(cfg, detail::render(sweep_table(cells), cfg.format), out);
    } else if (metrics_cmd->parsed()) {
      const auto attributed = detail::read_attributed(cfg, err);
      const auto matrix = build_daily_matrix(attributed.blocks);
      const auto wins = windows(matrix, granularity);
      detail::emit(cfg, detail::render(metrics_table(wins), cfg.format), out);
    } else if (simulate_cmd->parsed()) {
      const auto test = detail::test_config(cfg, alpha);
      SimConfig sim;
      sim.powers = cfg.powers;
      sim.blocks_per_day = cfg.blocks_per_day;
      sim.days = cfg.window_days;
      sim.trials = cfg.trials;
      sim.seed = cfg.seed;
      sim.threads = cfg.threads;
      if (cfg.coalition > 0) sim.coalition = cfg.coalition;
      const auto report = calibrate(sim, test);
      nlohmann::json j = {{"rejection_rate", report.rejection_rate},
                          {"coverage_rate", report.coverage_rate},
                          {"mean_range_width", report.mean_range_width},
                          {"trials", report.trials}};
      detail::emit(cfg, j.dump(2) + "\n", out);
    }
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}

}  // namespace ncstat::cli
