#pragma once

#include "nondecomp/types.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace nondecomp {

// Reader for the flat TOML subset used by experiment configs: # comments,
// [section] headers (flattened to "section.key"), and key = value lines with
// quoted strings, booleans, integers, floats and one-level arrays.
class TomlValue {
 public:
  using Array = std::vector<TomlValue>;
  std::variant<bool, long, double, std::string, Array> v;

  bool is_string() const { return std::holds_alternative<std::string>(v); }
  bool is_number() const {
    return std::holds_alternative<long>(v) ||
           std::holds_alternative<double>(v);
  }

  std::string as_string() const;
  double as_double() const;
  long as_long() const;
  bool as_bool() const;
};

class TomlTable {
 public:
  static TomlTable parse(std::istream& in);
  static TomlTable parse_file(const std::string& path);
  static TomlTable parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const TomlValue& at(const std::string& key) const;

  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_long(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_number_array(const std::string& key) const;

  const std::map<std::string, TomlValue>& values() const { return values_; }

 private:
  std::map<std::string, TomlValue> values_;
};

}  // namespace nondecomp
