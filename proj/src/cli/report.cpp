#include "warprig/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace warprig::cli {

using nlohmann::json;

namespace {

// Non-finite doubles are stored as strings so they survive a round trip.
json encode(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double decode(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::nan("");
  if (s == "inf") return HUGE_VAL;
  if (s == "-inf") return -HUGE_VAL;
  throw std::invalid_argument("report: bad number '" + s + "'");
}

std::string number_17g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Sorted keys, 17 significant digits for floats, two-space indent.
void dump(const json& j, std::string& out, int indent) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // nlohmann objects iterate in key order
        if (!first) out += ",\n";
        first = false;
        out += inner + json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump(j[i], out, indent + 2);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump(j[i], out, indent + 2);
      }
      out += "\n" + pad + "]";
      return;
    }
    case json::value_t::number_float:
      out += number_17g(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

std::string csv_number(double v) { return std::isfinite(v) ? number_17g(v) : encode(v).get<std::string>(); }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << content;
  os.close();
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void RunReport::add_check(const std::string& name, double value, double tolerance) {
  checks.push_back({name, value, tolerance, value <= tolerance});
}

bool RunReport::operator==(const RunReport& o) const {
  // Compare through JSON so NaN entries match each other.
  return report_to_json(*this) == report_to_json(o);
}

ReportFormat parse_format(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  if (name == "text") return ReportFormat::text;
  throw std::invalid_argument("unknown report format '" + name + "' (expected json, csv or text)");
}

json report_to_json(const RunReport& r) {
  json j;
  j["task"] = r.task;
  j["provenance"] = {{"config_hash", r.config_hash}, {"version", r.version}};
  j["verdict"] = r.passed() ? "PASS" : "FAIL";
  j["checks"] = json::array();
  for (const Check& c : r.checks)
    j["checks"].push_back(
        {{"name", c.name}, {"value", encode(c.value)}, {"tolerance", encode(c.tolerance)}, {"pass", c.pass}});
  j["results"] = r.results;
  j["tables"] = json::object();
  for (const auto& [name, t] : r.tables) {
    json rows = json::array();
    for (const auto& row : t.rows) {
      json jr = json::array();
      for (double v : row) jr.push_back(encode(v));
      rows.push_back(std::move(jr));
    }
    j["tables"][name] = {{"columns", t.columns}, {"rows", std::move(rows)}};
  }
  j["artifacts"] = json::array();
  for (const auto& [name, _] : r.artifacts) j["artifacts"].push_back(name);
  return j;
}

RunReport report_from_json(const json& j) {
  RunReport r;
  r.task = j.at("task").get<std::string>();
  r.config_hash = j.at("provenance").at("config_hash").get<std::string>();
  r.version = j.at("provenance").at("version").get<std::string>();
  for (const json& c : j.at("checks"))
    r.checks.push_back(
        {c.at("name").get<std::string>(), decode(c.at("value")), decode(c.at("tolerance")), c.at("pass").get<bool>()});
  r.results = j.at("results");
  for (auto it = j.at("tables").begin(); it != j.at("tables").end(); ++it) {
    Table t;
    t.columns = it.value().at("columns").get<std::vector<std::string>>();
    for (const json& row : it.value().at("rows")) {
      std::vector<double> vals;
      for (const json& v : row) vals.push_back(decode(v));
      t.rows.push_back(std::move(vals));
    }
    r.tables[it.key()] = std::move(t);
  }
  // Artifact contents live in their own files; only names are recorded.
  for (const json& name : j.at("artifacts")) r.artifacts[name.get<std::string>()] = "";
  return r;
}

std::string report_json_text(const RunReport& report) {
  std::string out;
  dump(report_to_json(report), out, 0);
  out += "\n";
  return out;
}

std::string checks_csv(const RunReport& report) {
  std::string out = "name,value,tolerance,pass\n";
  for (const Check& c : report.checks)
    out += c.name + "," + csv_number(c.value) + "," + csv_number(c.tolerance) + "," + (c.pass ? "1" : "0") + "\n";
  return out;
}

std::string table_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) out += (i ? "," : "") + table.columns[i];
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_number(row[i]);
    out += "\n";
  }
  return out;
}

std::string report_text(const RunReport& report, const std::string& timestamp) {
  std::ostringstream os;
  os << "task: " << report.task << "\n";
  os << "config sha256: " << report.config_hash << "\n";
  os << "version: " << report.version << "\n";
  if (!timestamp.empty()) os << "finished: " << timestamp << "\n";
  os << "\n";
  for (const Check& c : report.checks)
    os << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  value " << number_17g(c.value) << "  tolerance "
       << number_17g(c.tolerance) << "\n";
  if (!report.results.empty()) {
    std::string res;
    dump(report.results, res, 0);
    os << "\nresults:\n" << res << "\n";
  }
  for (const auto& [name, t] : report.tables) os << "table " << name << ": " << t.rows.size() << " rows\n";
  os << "\nverdict: " << (report.passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const RunReport& report, ReportFormat format,
                                               const std::filesystem::path& dir, const std::string& timestamp) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    write_file(path, content);
    written.push_back(path);
  };
  switch (format) {
    case ReportFormat::json:
      put("report.json", report_json_text(report));
      break;
    case ReportFormat::csv:
      put("checks.csv", checks_csv(report));
      for (const auto& [name, t] : report.tables) put(name + ".csv", table_csv(t));
      break;
    case ReportFormat::text:
      put("report.txt", report_text(report, timestamp));
      break;
  }
  for (const auto& [name, content] : report.artifacts) put(name, content);
  json meta = {{"config_hash", report.config_hash}, {"version", report.version}, {"finished", timestamp}};
  put("run_meta.json", meta.dump(2) + "\n");
  return written;
}

}  // namespace warprig::cli
