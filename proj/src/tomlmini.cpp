#include "nondecomp/tomlmini.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace nondecomp {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// strip a # comment that is not inside a quoted string
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

TomlValue parse_scalar(const std::string& raw, long line_no) {
  const std::string s = trim(raw);
  if (s.empty()) throw ParseError("toml line " + std::to_string(line_no) +
                                  ": empty value");
  TomlValue out;
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"') {
      throw ParseError("toml line " + std::to_string(line_no) +
                       ": unterminated string");
    }
    out.v = s.substr(1, s.size() - 2);
    return out;
  }
  if (s == "true" || s == "false") {
    out.v = (s == "true");
    return out;
  }
  // integer first, then float
  try {
    std::size_t pos = 0;
    const long l = std::stol(s, &pos);
    if (pos == s.size()) {
      out.v = l;
      return out;
    }
  } catch (const std::exception&) {
  }
  try {
    std::size_t pos = 0;
    const double d = std::stod(s, &pos);
    if (pos == s.size()) {
      out.v = d;
      return out;
    }
  } catch (const std::exception&) {
  }
  throw ParseError("toml line " + std::to_string(line_no) +
                   ": cannot parse value '" + s + "'");
}

TomlValue parse_value(const std::string& raw, long line_no) {
  const std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') {
      throw ParseError("toml line " + std::to_string(line_no) +
                       ": unterminated array");
    }
    TomlValue::Array items;
    const std::string body = s.substr(1, s.size() - 2);
    std::string item;
    bool quoted = false;
    for (char ch : body) {
      if (ch == '"') quoted = !quoted;
      if (ch == ',' && !quoted) {
        if (!trim(item).empty()) items.push_back(parse_scalar(item, line_no));
        item.clear();
      } else {
        item.push_back(ch);
      }
    }
    if (!trim(item).empty()) items.push_back(parse_scalar(item, line_no));
    TomlValue out;
    out.v = std::move(items);
    return out;
  }
  return parse_scalar(s, line_no);
}

}  // namespace

std::string TomlValue::as_string() const {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw ParseError("toml: value is not a string");
}

double TomlValue::as_double() const {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* l = std::get_if<long>(&v)) return static_cast<double>(*l);
  throw ParseError("toml: value is not a number");
}

long TomlValue::as_long() const {
  if (const auto* l = std::get_if<long>(&v)) return *l;
  throw ParseError("toml: value is not an integer");
}

bool TomlValue::as_bool() const {
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw ParseError("toml: value is not a boolean");
}

TomlTable TomlTable::parse(std::istream& in) {
  TomlTable table;
  std::string line;
  std::string prefix;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw ParseError("toml line " + std::to_string(line_no) +
                         ": bad section header");
      }
      prefix = trim(s.substr(1, s.size() - 2));
      if (!prefix.empty()) prefix += '.';
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw ParseError("toml line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    const std::string key = trim(s.substr(0, eq));
    if (key.empty()) {
      throw ParseError("toml line " + std::to_string(line_no) + ": empty key");
    }
    table.values_[prefix + key] = parse_value(s.substr(eq + 1), line_no);
  }
  return table;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  return parse(in);
}

TomlTable TomlTable::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

const TomlValue& TomlTable::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ParseError("missing config key: " + key);
  return it->second;
}

std::string TomlTable::get_string(const std::string& key,
                                  const std::string& fallback) const {
  return has(key) ? at(key).as_string() : fallback;
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  return has(key) ? at(key).as_double() : fallback;
}

long TomlTable::get_long(const std::string& key, long fallback) const {
  return has(key) ? at(key).as_long() : fallback;
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? at(key).as_bool() : fallback;
}

std::vector<double> TomlTable::get_number_array(const std::string& key) const {
  std::vector<double> out;
  if (!has(key)) return out;
  const auto* arr = std::get_if<TomlValue::Array>(&at(key).v);
  if (arr == nullptr) throw ParseError("config key is not an array: " + key);
  out.reserve(arr->size());
  for (const auto& item : *arr) out.push_back(item.as_double());
  return out;
}

}  // namespace nondecomp
