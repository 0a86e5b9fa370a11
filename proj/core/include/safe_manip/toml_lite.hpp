#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace safe_manip {

// Minimal TOML-subset reader covering what the shipped config files use:
// comments, [table] / [[array-of-tables]] headers with dotted paths, and
// key = value lines where value is a number, "string", boolean, or a flat
// array of those. Numbers are stored as double.
class TomlTable {
 public:
  using Scalar = std::variant<double, std::string, bool>;

  bool has(const std::string& key) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::vector<double> number_array(const std::string& key) const;
  std::vector<std::string> string_array(const std::string& key) const;

  // nullptr when the key names no subtable / no table array.
  const TomlTable* table(const std::string& key) const;
  const std::vector<TomlTable>* table_array(const std::string& key) const;

  std::vector<std::string> table_keys() const;

  // Parsing entry points. source_name appears in error messages.
  static TomlTable parse_file(const std::string& path);
  static TomlTable parse_string(const std::string& text, const std::string& source_name);

 private:
  friend class TomlParser;
  std::map<std::string, std::vector<Scalar>> scalars_;  // singletons stored as 1-element vectors
  std::map<std::string, bool> is_array_;
  std::map<std::string, TomlTable> subtables_;
  std::map<std::string, std::vector<TomlTable>> table_arrays_;
};

}  // namespace safe_manip
