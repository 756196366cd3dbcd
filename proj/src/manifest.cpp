// SPDX-License-Identifier: Apache-2.0
#include "flowlab/manifest.hpp"

#include <cstdint>

#include "flowlab/io.hpp"
#include "flowlab/json_util.hpp"

namespace flowlab {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 0x100000001b3ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["config_digest"] = m.config_digest;
  j["rng"]["seed"] = m.rng.seed;
  j["rng"]["stream"] = m.rng.stream_id;
  j["version"] = m.version;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

void save_manifest(const RunManifest& m, const std::string& path) {
  write_file(path, manifest_json(m));
}

RunManifest load_manifest(const std::string& path) {
  const nlohmann::json j = parse_json(read_file(path), path);
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.config_digest = j.at("config_digest").get<std::string>();
  m.rng.seed = j.at("rng").at("seed").get<std::uint64_t>();
  m.rng.stream_id = j.at("rng").at("stream").get<std::uint64_t>();
  m.version = j.at("version").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

}  // namespace flowlab
