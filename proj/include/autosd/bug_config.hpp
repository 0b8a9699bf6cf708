#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "autosd/trace_model.hpp"

namespace autosd {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads a bug-config file (docs/bug-config.md). Relative project roots are
/// resolved against the config file's directory; the method source is read
/// from the project. The error message stays empty when the file omits it.
BugContext load_bug_config(const std::filesystem::path& file);

BugContext parse_bug_config(const std::string& json_text, const std::filesystem::path& base_dir);

}  // namespace autosd
