#include "safe_manip/toml_lite.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "safe_manip/errors.hpp"

namespace safe_manip {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

std::vector<std::string> split_path(const std::string& path, const std::string& where) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    part = trim(part);
    if (!valid_key(part)) throw ConfigError(where + ": bad table path '" + path + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError(where + ": empty table path");
  return parts;
}

}  // namespace

class TomlParser {
 public:
  static TomlTable parse(const std::string& text, const std::string& source) {
    TomlTable root;
    TomlTable* current = &root;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      const std::string where = source + ":" + std::to_string(lineno);
      std::string line = trim(strip_comment(raw));
      if (line.empty()) continue;
      if (line.size() >= 4 && line.substr(0, 2) == "[[") {
        if (line.substr(line.size() - 2) != "]]") throw ConfigError(where + ": unterminated [[");
        current = descend_array(root, split_path(line.substr(2, line.size() - 4), where));
      } else if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(where + ": unterminated [");
        current = descend(root, split_path(line.substr(1, line.size() - 2), where));
      } else {
        parse_kv(*current, line, where);
      }
    }
    return root;
  }

 private:
  static TomlTable* descend(TomlTable& root, const std::vector<std::string>& parts) {
    TomlTable* t = &root;
    for (const auto& p : parts) {
      auto arr = t->table_arrays_.find(p);
      if (arr != t->table_arrays_.end()) {
        t = &arr->second.back();
      } else {
        t = &t->subtables_[p];
      }
    }
    return t;
  }

  static TomlTable* descend_array(TomlTable& root, const std::vector<std::string>& parts) {
    TomlTable* t = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      auto arr = t->table_arrays_.find(parts[i]);
      if (arr != t->table_arrays_.end()) {
        t = &arr->second.back();
      } else {
        t = &t->subtables_[parts[i]];
      }
    }
    auto& vec = t->table_arrays_[parts.back()];
    vec.emplace_back();
    return &vec.back();
  }

  static TomlTable::Scalar parse_scalar(const std::string& tok, const std::string& where) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
      return tok.substr(1, tok.size() - 2);
    }
    if (tok == "true") return true;
    if (tok == "false") return false;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
      throw ConfigError(where + ": cannot parse value '" + tok + "'");
    }
    return v;
  }

  static void parse_kv(TomlTable& table, const std::string& line, const std::string& where) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + ": bad key '" + key + "'");
    if (table.scalars_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError(where + ": missing value for '" + key + "'");
    std::vector<TomlTable::Scalar> out;
    bool is_array = false;
    if (val.front() == '[') {
      if (val.back() != ']') throw ConfigError(where + ": unterminated array for '" + key + "'");
      is_array = true;
      std::string body = val.substr(1, val.size() - 2);
      std::string tok;
      bool in_string = false;
      for (char c : body) {
        if (c == '"') in_string = !in_string;
        if (c == ',' && !in_string) {
          const std::string t = trim(tok);
          if (!t.empty()) out.push_back(parse_scalar(t, where));
          tok.clear();
        } else {
          tok += c;
        }
      }
      const std::string t = trim(tok);
      if (!t.empty()) out.push_back(parse_scalar(t, where));
    } else {
      out.push_back(parse_scalar(val, where));
    }
    table.scalars_[key] = std::move(out);
    table.is_array_[key] = is_array;
  }
};

bool TomlTable::has(const std::string& key) const { return scalars_.count(key) != 0; }

double TomlTable::number(const std::string& key) const {
  auto it = scalars_.find(key);
  if (it == scalars_.end() || it->second.empty() || !std::holds_alternative<double>(it->second[0])) {
    throw ConfigError("missing or non-numeric config key '" + key + "'");
  }
  return std::get<double>(it->second[0]);
}

double TomlTable::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::string TomlTable::str(const std::string& key) const {
  auto it = scalars_.find(key);
  if (it == scalars_.end() || it->second.empty() ||
      !std::holds_alternative<std::string>(it->second[0])) {
    throw ConfigError("missing or non-string config key '" + key + "'");
  }
  return std::get<std::string>(it->second[0]);
}

std::string TomlTable::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}

bool TomlTable::boolean_or(const std::string& key, bool fallback) const {
  auto it = scalars_.find(key);
  if (it == scalars_.end()) return fallback;
  if (it->second.empty() || !std::holds_alternative<bool>(it->second[0])) {
    throw ConfigError("non-boolean config key '" + key + "'");
  }
  return std::get<bool>(it->second[0]);
}

std::vector<double> TomlTable::number_array(const std::string& key) const {
  auto it = scalars_.find(key);
  if (it == scalars_.end()) throw ConfigError("missing config key '" + key + "'");
  std::vector<double> out;
  for (const auto& s : it->second) {
    if (!std::holds_alternative<double>(s)) {
      throw ConfigError("non-numeric element in config array '" + key + "'");
    }
    out.push_back(std::get<double>(s));
  }
  return out;
}

std::vector<std::string> TomlTable::string_array(const std::string& key) const {
  auto it = scalars_.find(key);
  if (it == scalars_.end()) throw ConfigError("missing config key '" + key + "'");
  std::vector<std::string> out;
  for (const auto& s : it->second) {
    if (!std::holds_alternative<std::string>(s)) {
      throw ConfigError("non-string element in config array '" + key + "'");
    }
    out.push_back(std::get<std::string>(s));
  }
  return out;
}

const TomlTable* TomlTable::table(const std::string& key) const {
  auto it = subtables_.find(key);
  return it == subtables_.end() ? nullptr : &it->second;
}

const std::vector<TomlTable>* TomlTable::table_array(const std::string& key) const {
  auto it = table_arrays_.find(key);
  return it == table_arrays_.end() ? nullptr : &it->second;
}

std::vector<std::string> TomlTable::table_keys() const {
  std::vector<std::string> keys;
  for (const auto& [k, _] : subtables_) keys.push_back(k);
  return keys;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return TomlParser::parse(buf.str(), path);
}

TomlTable TomlTable::parse_string(const std::string& text, const std::string& source_name) {
  return TomlParser::parse(text, source_name);
}

}  // namespace safe_manip
