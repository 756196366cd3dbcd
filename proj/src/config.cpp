// SPDX-License-Identifier: Apache-2.0
#include "flowlab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "flowlab/io.hpp"

namespace flowlab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string strip_comment(const std::string& line) {
  for (std::size_t i = 0; i < line.size(); ++i)
    if (line[i] == '#' || line[i] == ';') return line.substr(0, i);
  return line;
}

[[noreturn]] void bad_line(std::size_t lineno, const std::string& what) {
  throw config_error("config line " + std::to_string(lineno) + ": " + what);
}

const std::string* find(const ConfigFile& cfg, const std::string& section,
                        const std::string& key) {
  const auto s = cfg.sections.find(section);
  if (s == cfg.sections.end()) return nullptr;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return nullptr;
  return &k->second;
}

double parse_real(const std::string& text, const std::string& where) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw config_error(where + ": '" + text + "' is not a number");
  return v;
}

}  // namespace

ConfigFile parse_config(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') bad_line(lineno, "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty()) bad_line(lineno, "empty section name");
      cfg.sections[section];  // a section may legitimately stay empty
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) bad_line(lineno, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) bad_line(lineno, "empty key");
    if (section.empty()) bad_line(lineno, "key '" + key + "' appears before any [section]");
    if (cfg.sections[section].count(key))
      bad_line(lineno, "duplicate key '" + section + "." + key + "'");
    cfg.sections[section][key] = value;
  }
  return cfg;
}

ConfigFile load_config(const std::string& path) { return parse_config(read_file(path)); }

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(*this, section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  const std::string* v = find(*this, section, key);
  return v ? *v : fallback;
}

double ConfigFile::get_real(const std::string& section, const std::string& key,
                            double fallback) const {
  const std::string* v = find(*this, section, key);
  if (!v) return fallback;
  return parse_real(*v, section + "." + key);
}

Index ConfigFile::get_int(const std::string& section, const std::string& key,
                          Index fallback) const {
  const std::string* v = find(*this, section, key);
  if (!v) return fallback;
  const std::string where = section + "." + key;
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(*v, &used);
  } catch (const std::exception&) {
    throw config_error(where + ": '" + *v + "' is not an integer");
  }
  if (used != v->size()) throw config_error(where + ": '" + *v + "' is not an integer");
  return static_cast<Index>(out);
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  const std::string* v = find(*this, section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw config_error(section + "." + key + ": '" + *v + "' is not a boolean");
}

std::vector<double> ConfigFile::get_reals(const std::string& section, const std::string& key,
                                          const std::vector<double>& fallback) const {
  const std::string* v = find(*this, section, key);
  if (!v) return fallback;
  const std::string where = section + "." + key;
  std::vector<double> out;
  std::istringstream in(*v);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw config_error(where + ": empty list entry");
    out.push_back(parse_real(t, where));
  }
  if (out.empty()) throw config_error(where + ": empty list");
  return out;
}

void require_known(const ConfigFile& cfg,
                   const std::map<std::string, std::set<std::string>>& schema) {
  for (const auto& [section, keys] : cfg.sections) {
    const auto s = schema.find(section);
    if (s == schema.end()) throw config_error("unknown config section [" + section + "]");
    for (const auto& [key, value] : keys) {
      (void)value;
      if (!s->second.count(key))
        throw config_error("unknown config key '" + section + "." + key + "'");
    }
  }
}

std::string canonical_text(const ConfigFile& cfg) {
  std::ostringstream os;
  for (const auto& [section, keys] : cfg.sections)
    for (const auto& [key, value] : keys) os << section << '.' << key << '=' << value << '\n';
  return os.str();
}

}  // namespace flowlab
