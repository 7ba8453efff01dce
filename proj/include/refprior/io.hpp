#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "refprior/common.hpp"

namespace refprior {

/// 17 significant digits, '.' decimal regardless of locale.
std::string format_double(double x);

/// One row per draw, columns theta_0..theta_{D-1}.
std::string matrix_to_csv(const Matrix& m, const std::string& prefix = "theta");

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Pretty JSON with a trailing newline. Doubles pass through format_double
/// so the bytes do not depend on the library's float printer.
std::string dump_json(const nlohmann::json& j);

}  // namespace refprior
