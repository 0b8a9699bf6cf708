#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace autosd {

struct SourceLocation {
    std::string file;
    int line = 0;

    bool operator==(const SourceLocation&) const = default;
};

/// Composite debugger command: break at a location, run, print one expression.
struct DebuggerProbe {
    SourceLocation location;
    std::string expression;

    bool operator==(const DebuggerProbe&) const = default;
};

enum class EditKind { Replace, Add, Delete };

struct Edit {
    EditKind kind = EditKind::Replace;
    int line = 0;          // absolute, 1-based
    std::string old_expr;  // Replace, Delete
    std::string new_expr;  // Replace, Add

    bool operator==(const Edit&) const = default;

    static Edit replace(int line, std::string old_expr, std::string new_expr) {
        return {EditKind::Replace, line, std::move(old_expr), std::move(new_expr)};
    }
    static Edit add(int line, std::string new_expr) { return {EditKind::Add, line, {}, std::move(new_expr)}; }
    static Edit del(int line, std::string old_expr) { return {EditKind::Delete, line, std::move(old_expr), {}}; }
};

struct EditScript {
    std::vector<Edit> edits;
    bool run_test = false;

    bool operator==(const EditScript&) const = default;
};

using ExperimentScript = std::variant<DebuggerProbe, EditScript>;

/// Base for every experiment parse failure; offset is a byte position inside the input.
class ExperimentParseError : public std::runtime_error {
public:
    ExperimentParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class DslSyntaxError : public ExperimentParseError {
public:
    DslSyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found);
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::vector<std::string> expected_;
};

/// Probe vocabulary and edit vocabulary combined in one script.
class MixedScriptError : public ExperimentParseError {
public:
    using ExperimentParseError::ExperimentParseError;
};

/// Grammar is documented in docs/dsl.md. Keywords are case-insensitive,
/// whitespace between tokens is free, string arguments must be double-quoted.
ExperimentScript parse_experiment(std::string_view raw);

/// Canonical single-line form; parse_experiment(render_experiment(s)) == s.
std::string render_experiment(const ExperimentScript& script);

std::string_view to_string(EditKind kind);

}  // namespace autosd
