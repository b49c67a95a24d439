#pragma once
//
// Small I/O helpers shared by the experiment CLI: CSV emission with
// full-precision scientific formatting (deterministic byte-for-byte given the
// same numbers) and a flat key = value configuration format with # comments.
//

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lrpde {

using CsvValue = std::variant<long long, double, std::string>;

inline std::string format_csv_value(const CsvValue& v) {
  if (std::holds_alternative<long long>(v)) return std::to_string(std::get<long long>(v));
  if (std::holds_alternative<double>(v)) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17e", std::get<double>(v));
    return buf;
  }
  return std::get<std::string>(v);
}

inline void write_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<CsvValue>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::runtime_error("csv row width mismatch: " + path);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_csv_value(row[i]);
    out << '\n';
  }
}

/// Flat "key = value" configuration with '#' comments and blank lines.
class Config {
 public:
  static Config parse(std::istream& in) {
    Config cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set_default(const std::string& key, const std::string& value) {
    values_.emplace(key, value);
  }

  std::string get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::runtime_error("missing config key: " + key);
    return it->second;
  }
  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  double get_double(const std::string& key) const {
    const std::string s = get(key);
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::runtime_error("config key " + key + ": not a number: " + s);
    return v;
  }
  long long get_int(const std::string& key) const {
    const std::string s = get(key);
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::runtime_error("config key " + key + ": not an integer: " + s);
    return v;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
  }

  std::map<std::string, std::string> values_;
};

}  // namespace lrpde
