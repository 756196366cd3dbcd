// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "json.hpp"

#include "flowlab/common.hpp"

namespace flowlab {

// Matrix <-> JSON list-of-rows conversion shared by every persistence format
// in the library.  `name` labels the field in error messages.
nlohmann::json matrix_rows(const Mat& m);
Mat matrix_from_rows(const nlohmann::json& rows, const std::string& name);

// Parse wrapper that maps JSON syntax errors onto config_error.
nlohmann::json parse_json(const std::string& text, const std::string& what);

}  // namespace flowlab
