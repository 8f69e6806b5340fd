#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pdm::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kValidation = 3 };

/// Entry point of the `pdmchain` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace pdm::cli
