#pragma once

#include <string>
#include <string_view>

namespace autosd {

/// GNU-style unified diff (3 lines of context by default). Empty when the texts are equal.
std::string unified_diff(std::string_view old_text, std::string_view new_text, const std::string& path,
                         int context = 3);

}  // namespace autosd
