#include "tunefree/ini.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace tunefree {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("ini: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

IniFile IniFile::parse_string(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    // Strip comments ('#' or ';') outside of values with escapes; values in
    // this format never contain either character.
    const std::size_t hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw IniError(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw IniError(line_no, "empty section name");
      ini.data_[section];  // declare section even if it stays empty
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw IniError(line_no, "expected key = value");
    if (section.empty())
      throw IniError(line_no, "key outside of any [section]");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw IniError(line_no, "empty key");
    auto& sec = ini.data_[section];
    if (sec.count(key))
      throw IniError(line_no, "duplicate key '" + key + "' in [" + section + "]");
    sec[key] = value;
  }
  return ini;
}

bool IniFile::has_section(const std::string& section) const {
  return data_.count(section) > 0;
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  auto it = data_.find(section);
  return it != data_.end() && it->second.count(key) > 0;
}

const std::string& IniFile::get(const std::string& section,
                                const std::string& key) const {
  auto it = data_.find(section);
  if (it == data_.end())
    throw std::runtime_error("ini: missing section [" + section + "]");
  auto kt = it->second.find(key);
  if (kt == it->second.end())
    throw std::runtime_error("ini: missing key '" + key + "' in [" + section + "]");
  return kt->second;
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double IniFile::get_double(const std::string& section,
                           const std::string& key) const {
  const std::string& v = get(section, key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("ini: key '" + key + "' in [" + section +
                             "] is not a number: " + v);
  return d;
}

double IniFile::get_double_or(const std::string& section,
                              const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

long long IniFile::get_int(const std::string& section,
                           const std::string& key) const {
  const std::string& v = get(section, key);
  char* end = nullptr;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("ini: key '" + key + "' in [" + section +
                             "] is not an integer: " + v);
  return i;
}

long long IniFile::get_int_or(const std::string& section,
                              const std::string& key, long long fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

bool IniFile::get_bool_or(const std::string& section, const std::string& key,
                          bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = get(section, key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("ini: key '" + key + "' in [" + section +
                           "] is not a boolean: " + v);
}

std::vector<std::string> IniFile::get_strings(const std::string& section,
                                              const std::string& key) const {
  const std::string& v = get(section, key);
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> IniFile::get_doubles(const std::string& section,
                                         const std::string& key) const {
  std::vector<double> out;
  for (const std::string& s : get_strings(section, key)) {
    char* end = nullptr;
    const double d = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
      throw std::runtime_error("ini: list element in '" + key + "' of [" +
                               section + "] is not a number: " + s);
    out.push_back(d);
  }
  return out;
}

std::vector<std::string> IniFile::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : data_) out.push_back(name);
  return out;
}

std::vector<std::string> IniFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto it = data_.find(section);
  if (it == data_.end()) return out;
  for (const auto& [k, _] : it->second) out.push_back(k);
  return out;
}

}  // namespace tunefree
