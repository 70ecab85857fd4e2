#pragma once

#include <string>
#include <vector>

namespace simgen::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

// args excludes the program name.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, char** argv);

// Parses a flat `key = value` file (`#` starts a comment) into
// "--key value" tokens, in file order. Boolean values map to a bare flag.
std::vector<std::string> config_tokens(const std::string& text);

}  // namespace simgen::cli
