// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "flowlab/rng.hpp"

namespace flowlab {

inline constexpr const char* kVersion = "flowlab 1.0.0";

// FNV-1a 64-bit digest, 16 lowercase hex characters.
std::string fnv1a_hex(const std::string& text);

// Provenance record written next to every command's outputs: the command,
// the digest of its canonical config, the root RNG, the code version, and
// every file the run emitted.
struct RunManifest {
  std::string command;
  std::string config_digest;
  RngSpec rng{0, 0};
  std::string version = kVersion;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& m);
void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

}  // namespace flowlab
