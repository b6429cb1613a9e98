#pragma once

#include <charconv>
#include <deque>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "orlicz/core.hpp"

namespace orlicz {

enum class Verdict { pass, fail, informational };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "informational";
  }
}

// Shortest round-trip decimal form; stable across runs on one platform.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
  std::vector<double> column(const std::string& c) const {
    std::size_t idx = columns.size();
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == c) idx = i;
    if (idx == columns.size()) throw std::out_of_range("no column " + c + " in " + name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[idx]);
    return out;
  }
};

struct DiagnosticsReport {
  std::string name;
  std::string inputs_digest;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::pair<std::string, double>> tolerances;
  std::vector<std::pair<std::string, bool>> checks;
  std::deque<Table> tables;  // deque: add_table references stay valid
  std::vector<std::string> notes;
  Verdict verdict = Verdict::informational;

  // Non-finite values are saturated so the "every metric finite" contract
  // holds; the saturation is recorded as a note.
  void set(const std::string& key, double value) {
    if (!std::isfinite(value)) {
      notes.push_back("metric " + key + " saturated from " + format_double(value));
      value = value < 0 ? -std::numeric_limits<double>::max() : std::numeric_limits<double>::max();
    }
    for (auto& [k, v] : metrics)
      if (k == key) {
        v = value;
        return;
      }
    metrics.emplace_back(key, value);
  }
  void tolerance(const std::string& key, double value) { tolerances.emplace_back(key, value); }
  void check(const std::string& key, bool ok) { checks.emplace_back(key, ok); }

  bool has(const std::string& key) const {
    for (const auto& [k, v] : metrics)
      if (k == key) return true;
    return false;
  }
  double metric(const std::string& key) const {
    for (const auto& [k, v] : metrics)
      if (k == key) return v;
    throw std::out_of_range("no metric " + key + " in report " + name);
  }
  bool check_passed(const std::string& key) const {
    for (const auto& [k, v] : checks)
      if (k == key) return v;
    throw std::out_of_range("no check " + key + " in report " + name);
  }
  Table& table(const std::string& key) {
    for (auto& t : tables)
      if (t.name == key) return t;
    throw std::out_of_range("no table " + key + " in report " + name);
  }
  const Table& table(const std::string& key) const {
    return const_cast<DiagnosticsReport*>(this)->table(key);
  }
  Table& add_table(std::string tname, std::vector<std::string> columns) {
    tables.push_back(Table{std::move(tname), std::move(columns), {}});
    return tables.back();
  }

  // Verdict follows the checks: pass iff every check passed. Reports without
  // checks stay informational.
  void finalize() {
    if (checks.empty()) {
      verdict = Verdict::informational;
      return;
    }
    verdict = Verdict::pass;
    for (const auto& [k, ok] : checks)
      if (!ok) verdict = Verdict::fail;
  }
  bool passed() const { return verdict == Verdict::pass; }
  bool failed() const { return verdict == Verdict::fail; }
};

// Long-format CSV: one value per row, stable header.
inline void write_csv(std::ostream& os, const DiagnosticsReport& r) {
  os << "report,section,row,column,value\n";
  os << r.name << ",verdict,0,verdict," << to_string(r.verdict) << "\n";
  os << r.name << ",digest,0,inputs," << r.inputs_digest << "\n";
  for (const auto& [k, v] : r.metrics) os << r.name << ",metric,0," << k << "," << format_double(v) << "\n";
  for (const auto& [k, v] : r.tolerances)
    os << r.name << ",tolerance,0," << k << "," << format_double(v) << "\n";
  for (const auto& [k, ok] : r.checks) os << r.name << ",check,0," << k << "," << (ok ? "pass" : "fail") << "\n";
  for (const auto& t : r.tables)
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << r.name << "," << t.name << "," << i << "," << t.columns[c] << "," << format_double(t.rows[i][c])
           << "\n";
  for (std::size_t i = 0; i < r.notes.size(); ++i) {
    std::string note = r.notes[i];
    for (auto& ch : note)
      if (ch == ',' || ch == '\n') ch = ';';
    os << r.name << ",note," << i << ",text," << note << "\n";
  }
}

}  // namespace orlicz
