#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace autosd {

/// Splits on '\n'. A trailing newline does not produce an empty last element.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines);
std::string join(const std::vector<std::string>& items, std::string_view sep);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);
std::string_view leading_whitespace(std::string_view line);

bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string to_lower(std::string_view s);

/// Byte offset of the first case-insensitive occurrence, or npos.
std::size_t find_ci(std::string_view haystack, std::string_view needle, std::size_t from = 0);

/// Truncates to at most max_chars UTF-8 code points, appending "…" when cut.
std::string truncate_utf8(std::string_view s, std::size_t max_chars);

/// Truncates to at most max_bytes on a code-point boundary, appending a marker when cut.
std::string cap_bytes(std::string_view s, std::size_t max_bytes, std::string_view marker);

std::string base64_encode(std::string_view data);
std::string base64_decode(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

/// Hex FNV-1a 64 digest; used for content fingerprints, not security.
std::string fingerprint(std::string_view data);

}  // namespace autosd
