#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tunefree {

struct IniError : std::runtime_error {
  int line;
  IniError(int line_, const std::string& msg)
      : std::runtime_error("ini: line " + std::to_string(line_) + ": " + msg),
        line(line_) {}
};

// Small INI reader: [section] headers, key = value pairs, '#'/';' comments.
// Duplicate keys and keys outside a section are parse errors with line
// numbers. Values are strings; typed getters parse on access.
class IniFile {
 public:
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  const std::string& get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  long long get_int(const std::string& section, const std::string& key) const;
  long long get_int_or(const std::string& section, const std::string& key,
                       long long fallback) const;
  bool get_bool_or(const std::string& section, const std::string& key,
                   bool fallback) const;

  // Comma-separated lists.
  std::vector<double> get_doubles(const std::string& section,
                                  const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& section,
                                       const std::string& key) const;

  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

 private:
  // section -> key -> value, insertion order preserved for reporting.
  std::map<std::string, std::map<std::string, std::string>> data_;
};

}  // namespace tunefree
