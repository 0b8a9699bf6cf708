#include "autosd/bug_config.hpp"

#include <json.hpp>

#include "autosd/text_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace autosd {

namespace {

template <class T>
T field(const json& doc, const char* name) {
    if (!doc.contains(name)) throw ConfigError(std::string("missing field: ") + name);
    try {
        return doc.at(name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("field has the wrong type: ") + name);
    }
}

template <class T>
std::optional<T> optional_field(const json& doc, const char* name) {
    if (!doc.contains(name) || doc.at(name).is_null()) return std::nullopt;
    return field<T>(doc, name);
}

}  // namespace

BugContext parse_bug_config(const std::string& json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what());
    }
    if (!doc.is_object()) throw ConfigError("bug config must be a JSON object");

    BugContext bug;
    bug.id = field<std::string>(doc, "id");
    fs::path root = field<std::string>(doc, "project_root");
    bug.project_root = (root.is_absolute() ? root : base_dir / root).lexically_normal();
    bug.buggy_file = field<std::string>(doc, "buggy_file");
    auto span = field<std::vector<int>>(doc, "method_span");
    if (span.size() != 2) throw ConfigError("method_span must be [start, end]");
    bug.method_span = {span[0], span[1]};
    if (bug.method_span.start < 1 || bug.method_span.end < bug.method_span.start)
        throw ConfigError("method_span must satisfy 1 <= start <= end");
    bug.failing_test_command = field<std::string>(doc, "failing_test_command");
    bug.suite_commands = optional_field<std::vector<std::string>>(doc, "suite_commands").value_or(std::vector<std::string>{});
    bug.error_message = optional_field<std::string>(doc, "error_message").value_or("");
    bug.bug_report = optional_field<std::string>(doc, "bug_report");
    bug.failing_test_source = optional_field<std::string>(doc, "failing_test_source");
    auto language = optional_field<std::string>(doc, "language").value_or("python");
    if (language != "python") throw ConfigError("unsupported language: " + language);

    if (bug.id.empty() || bug.id.find('/') != std::string::npos || bug.id == "." || bug.id == "..")
        throw ConfigError("id must be a non-empty name without '/'");
    if (!fs::is_directory(bug.project_root)) throw ConfigError("project_root is not a directory: " + bug.project_root.string());
    const auto file = bug.project_root / bug.buggy_file;
    if (!fs::is_regular_file(file)) throw ConfigError("buggy_file not found: " + file.string());
    auto lines = split_lines(read_file(file.string()));
    if (bug.method_span.end > int(lines.size()))
        throw ConfigError("method_span ends past the end of " + bug.buggy_file.string());
    bug.method_source =
        join_lines({lines.begin() + (bug.method_span.start - 1), lines.begin() + bug.method_span.end});
    return bug;
}

BugContext load_bug_config(const fs::path& file) {
    std::string text;
    try {
        text = read_file(file.string());
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_bug_config(text, fs::absolute(file).parent_path());
}

}  // namespace autosd
