// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowlab/common.hpp"

namespace flowlab {

// Sectioned key/value text:
//   [section]
//   key = value        # trailing comments with '#' or ';'
// Values are kept verbatim (trimmed); typed accessors parse on demand and
// reject trailing garbage.  Unknown sections or keys are caught by
// require_known so a typo cannot silently fall back to a default.
struct ConfigFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  double get_real(const std::string& section, const std::string& key, double fallback) const;
  Index get_int(const std::string& section, const std::string& key, Index fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  // Comma-separated list of reals.
  std::vector<double> get_reals(const std::string& section, const std::string& key,
                                const std::vector<double>& fallback) const;
};

ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::string& path);

// Rejects sections/keys outside the schema (section -> allowed keys).
void require_known(const ConfigFile& cfg,
                   const std::map<std::string, std::set<std::string>>& schema);

// Sorted "section.key=value" lines; the digest input, independent of
// formatting and comment noise in the source text.
std::string canonical_text(const ConfigFile& cfg);

}  // namespace flowlab
