#pragma once

// Run reports and their serializations.
//
// JSON: keys sorted, floats written with 17 significant digits, no
// timestamps (those go to a separate run_meta.json) so that identical
// configurations give byte-identical report.json files.
//
// CSV: checks.csv (name, value, tolerance, pass) plus one <table>.csv per
// table, with the table's column names as header.

#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

namespace warprig::cli {

/// A verdict: passes when value <= tolerance. Values are nonnegative deviations.
struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  bool operator==(const Check&) const = default;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  bool operator==(const Table&) const = default;
};

struct RunReport {
  std::string task;
  std::string config_hash;
  std::string version;
  std::vector<Check> checks;
  nlohmann::json results = nlohmann::json::object();
  std::map<std::string, Table> tables;
  std::map<std::string, std::string> artifacts;  ///< file name -> contents (written as-is)

  bool passed() const;
  void add_check(const std::string& name, double value, double tolerance);

  bool operator==(const RunReport& other) const;
};

enum class ReportFormat { json, csv, text };

ReportFormat parse_format(const std::string& name);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);
std::string report_json_text(const RunReport& report);
std::string checks_csv(const RunReport& report);
std::string table_csv(const Table& table);
/// Human-readable summary; `timestamp` is printed when non-empty.
std::string report_text(const RunReport& report, const std::string& timestamp = "");

/// Writes the report in the given format into `dir` (created if needed),
/// plus artifacts and run_meta.json. Returns the written paths.
/// Throws std::runtime_error naming the path on I/O failure.
std::vector<std::filesystem::path> emit_report(const RunReport& report, ReportFormat format,
                                               const std::filesystem::path& dir, const std::string& timestamp);

}  // namespace warprig::cli
