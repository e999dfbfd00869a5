#pragma once

// Consolidates metric CSVs written by the other commands into one table per
// figure family, plus a JSON rendering of the same tables.

#include <filesystem>
#include <string>
#include <vector>

namespace mapkit {

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<bool> numeric;  // per column: emitted as a bare JSON number
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::string to_csv() const;
};

struct Report {
  std::vector<ReportTable> tables;  // fixed order: tau, scores, passk, cost, prr, summary

  [[nodiscard]] const ReportTable& table(const std::string& name) const;
  [[nodiscard]] std::string to_json() const;
};

struct ReportOptions {
  std::string baseline = "raw-greedy";
  std::string candidate = "merged-passk";
};

/// Input kind is recognised from the CSV header; anything else throws
/// SchemaMismatch.
[[nodiscard]] Report build_report(const std::vector<std::filesystem::path>& inputs,
                                  const ReportOptions& options = {});

/// Writes <table>.csv for every table and report.json into `dir`.
void write_report(const Report& report, const std::filesystem::path& dir);

struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Plain comma-separated text without quoting. Throws SchemaMismatch on
/// ragged rows.
[[nodiscard]] CsvDocument parse_csv(const std::string& text, const std::string& source);

}  // namespace mapkit
