#pragma once

#include <chrono>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "autosd/debug_driver.hpp"
#include "autosd/experiment_dsl.hpp"
#include "autosd/trace_model.hpp"

namespace autosd {

class EditError : public std::runtime_error {
public:
    EditError(int line, const std::string& message) : std::runtime_error(message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class EditTargetNotFound : public EditError {
public:
    EditTargetNotFound(int line, std::string old_expr);
    const std::string& old_expr() const { return old_expr_; }

private:
    std::string old_expr_;
};

class LineOutOfRange : public EditError {
public:
    LineOutOfRange(int line, int line_count);
};

class ReplacementSyntaxError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SpanMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A disposable copy of a project tree in a fresh temporary directory.
/// The copy skips __pycache__ directories and is removed on destruction.
class ProjectSnapshot {
public:
    static ProjectSnapshot create(const std::filesystem::path& origin_root);

    ProjectSnapshot(ProjectSnapshot&& other) noexcept;
    ProjectSnapshot& operator=(ProjectSnapshot&& other) noexcept;
    ProjectSnapshot(const ProjectSnapshot&) = delete;
    ProjectSnapshot& operator=(const ProjectSnapshot&) = delete;
    ~ProjectSnapshot();

    const std::filesystem::path& root() const { return root_; }
    const std::filesystem::path& origin() const { return origin_; }
    bool dirty() const { return dirty_; }

    /// Resolves a project-relative path; throws if it escapes the snapshot.
    std::filesystem::path resolve(const std::filesystem::path& relative) const;
    std::string read(const std::filesystem::path& relative) const;
    void write(const std::filesystem::path& relative, const std::string& content);

private:
    ProjectSnapshot(std::filesystem::path origin, std::filesystem::path root)
        : origin_(std::move(origin)), root_(std::move(root)) {}

    std::filesystem::path origin_;
    std::filesystem::path root_;
    bool dirty_ = false;
};

struct EditReport {
    int lines_added = 0;
    int lines_removed = 0;
    int lines_changed = 0;
};

/// Applies edits in order. Line numbers refer to the file as left by the previous edit.
EditReport apply_edits(ProjectSnapshot& snapshot, const std::filesystem::path& file, const std::vector<Edit>& edits);

/// Same rules over an in-memory text; used by apply_edits and by tests.
std::string apply_edits_to_text(const std::string& text, const std::vector<Edit>& edits, EditReport* report = nullptr);

/// The replacement re-indented to the method's base indentation, newline-terminated.
/// Throws ReplacementSyntaxError if it is not a syntactically valid function.
std::string normalize_replacement(const BugContext& bug, const std::string& replacement);

/// Replaces the method span with the replacement and returns the unified diff
/// against the original file (empty for a no-op).
std::string apply_method_patch(ProjectSnapshot& snapshot, const BugContext& bug, const std::string& replacement);

Observation run_failing_test(ExecutionAdapter& adapter, const ProjectSnapshot& snapshot, const BugContext& bug,
                             std::chrono::seconds timeout);

}  // namespace autosd
