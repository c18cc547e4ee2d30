#pragma once

// Result records: column-oriented tables, verdicts, JSON summary and CSV output.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplet/cli/config.hpp"

namespace droplet::cli {

/// Finite doubles as numbers; non-finite values as the strings "inf", "-inf", "nan".
inline json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

struct Column {
  std::string name;
  std::vector<json> values;
  bool operator==(const Column&) const = default;
};

struct Table {
  std::string name;
  std::vector<Column> columns;

  Table() = default;
  Table(std::string n, const std::vector<std::string>& headers) : name(std::move(n)) {
    for (const auto& h : headers) columns.push_back({h, {}});
  }

  void add_row(const std::vector<json>& row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add_row: width mismatch in " + name);
    for (std::size_t i = 0; i < row.size(); ++i) columns[i].values.push_back(row[i]);
  }

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().values.size(); }
  bool operator==(const Table&) const = default;
};

struct Verdict {
  std::string name;
  bool passed = false;
  json value;      ///< the measured quantity
  json tolerance;  ///< the threshold it is compared with
  std::string detail;
  bool operator==(const Verdict&) const = default;
};

struct ResultRecord {
  std::string command;
  std::string config_hash;
  std::string version = kArtifactVersion;
  std::string timestamp;
  json config;
  std::vector<Table> tables;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notices;

  bool passed() const {
    for (const auto& v : verdicts) {
      if (!v.passed) return false;
    }
    return true;
  }

  void verdict(std::string name, bool ok, json value, json tolerance, std::string detail = {}) {
    verdicts.push_back({std::move(name), ok, std::move(value), std::move(tolerance), std::move(detail)});
  }

  bool operator==(const ResultRecord&) const = default;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json to_json(const ResultRecord& r) {
  json j;
  j["command"] = r.command;
  j["config_hash"] = r.config_hash;
  j["version"] = r.version;
  j["timestamp"] = r.timestamp;
  j["config"] = r.config;
  j["passed"] = r.passed();
  j["tables"] = json::array();
  for (const auto& t : r.tables) {
    json cols = json::array();
    for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"values", c.values}});
    j["tables"].push_back({{"name", t.name}, {"columns", cols}});
  }
  j["verdicts"] = json::array();
  for (const auto& v : r.verdicts) {
    j["verdicts"].push_back(
        {{"name", v.name}, {"passed", v.passed}, {"value", v.value}, {"tolerance", v.tolerance}, {"detail", v.detail}});
  }
  j["notices"] = r.notices;
  return j;
}

inline ResultRecord record_from_json(const json& j) {
  ResultRecord r;
  r.command = j.at("command").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.version = j.at("version").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.config = j.at("config");
  for (const auto& t : j.at("tables")) {
    Table table;
    table.name = t.at("name").get<std::string>();
    for (const auto& c : t.at("columns")) {
      table.columns.push_back({c.at("name").get<std::string>(), c.at("values").get<std::vector<json>>()});
    }
    r.tables.push_back(std::move(table));
  }
  for (const auto& v : j.at("verdicts")) {
    r.verdicts.push_back({v.at("name").get<std::string>(), v.at("passed").get<bool>(), v.at("value"), v.at("tolerance"),
                          v.at("detail").get<std::string>()});
  }
  r.notices = j.at("notices").get<std::vector<std::string>>();
  return r;
}

inline std::string summary_text(const ResultRecord& r) { return to_json(r).dump(2) + "\n"; }

inline ResultRecord parse_summary(const std::string& text) { return record_from_json(json::parse(text)); }

inline std::string csv_cell(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string csv_text(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + csv_cell(t.columns[c].name);
  out += "\n";
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + csv_cell(t.columns[c].values[r]);
    out += "\n";
  }
  return out;
}

/// Writes `text` to `path` through a temporary file in the same directory and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + tmp.string());
    f << text;
    if (!f.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path summary;
};

inline OutputPaths output_paths(const std::string& out_dir, const std::string& command, const std::string& hash) {
  const std::filesystem::path base = std::filesystem::path(out_dir) / (command + "-" + hash);
  return {std::filesystem::path(base.string() + ".csv"), std::filesystem::path(base.string() + ".summary.txt")};
}

/// The first table goes to the CSV file; the summary carries all tables.
inline OutputPaths write_outputs(const std::string& out_dir, const ResultRecord& r, const std::string& summary) {
  const auto paths = output_paths(out_dir, r.command, r.config_hash);
  atomic_write(paths.csv, r.tables.empty() ? std::string() : csv_text(r.tables.front()));
  atomic_write(paths.summary, summary);
  return paths;
}

}  // namespace droplet::cli
