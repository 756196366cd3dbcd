// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

namespace flowlab {

// Whole-file text helpers; failures raise config_error with the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace flowlab
