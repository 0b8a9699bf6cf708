#include "autosd/patch_executor.hpp"

#include <cctype>
#include <cstdlib>
#include <regex>
#include <system_error>

#include "autosd/pysource.hpp"
#include "autosd/text_util.hpp"
#include "autosd/unified_diff.hpp"

namespace fs = std::filesystem;

namespace autosd {

EditTargetNotFound::EditTargetNotFound(int line, std::string old_expr)
    : EditError(line, "expression \"" + old_expr + "\" not found on line " + std::to_string(line)),
      old_expr_(std::move(old_expr)) {}

LineOutOfRange::LineOutOfRange(int line, int line_count)
    : EditError(line, "line " + std::to_string(line) + " is out of range (file has " + std::to_string(line_count) +
                          " lines)") {}

// ---- snapshots -------------------------------------------------------------

namespace {

void copy_tree(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    for (const auto& entry : fs::directory_iterator(from)) {
        const auto name = entry.path().filename();
        const auto target = to / name;
        if (entry.is_symlink()) {
            fs::copy_symlink(entry.path(), target);
        } else if (entry.is_directory()) {
            if (name == "__pycache__") continue;
            copy_tree(entry.path(), target);
        } else if (entry.is_regular_file()) {
            fs::copy_file(entry.path(), target);
        }
    }
}

}  // namespace

ProjectSnapshot ProjectSnapshot::create(const fs::path& origin_root) {
    if (!fs::is_directory(origin_root)) throw std::runtime_error("project root is not a directory: " + origin_root.string());
    std::string pattern = (fs::temp_directory_path() / "autosd-XXXXXX").string();
    if (!::mkdtemp(pattern.data())) throw std::system_error(errno, std::generic_category(), "mkdtemp");
    ProjectSnapshot snap(fs::absolute(origin_root), fs::path(pattern));
    copy_tree(origin_root, snap.root_);
    return snap;
}

ProjectSnapshot::ProjectSnapshot(ProjectSnapshot&& other) noexcept
    : origin_(std::move(other.origin_)), root_(std::move(other.root_)), dirty_(other.dirty_) {
    other.root_.clear();
}

ProjectSnapshot& ProjectSnapshot::operator=(ProjectSnapshot&& other) noexcept {
    if (this != &other) {
        std::error_code ec;
        if (!root_.empty()) fs::remove_all(root_, ec);
        origin_ = std::move(other.origin_);
        root_ = std::move(other.root_);
        dirty_ = other.dirty_;
        other.root_.clear();
    }
    return *this;
}

ProjectSnapshot::~ProjectSnapshot() {
    std::error_code ec;
    if (!root_.empty()) fs::remove_all(root_, ec);
}

fs::path ProjectSnapshot::resolve(const fs::path& relative) const {
    if (relative.is_absolute()) throw std::runtime_error("expected a project-relative path: " + relative.string());
    fs::path joined = (root_ / relative).lexically_normal();
    auto rel = joined.lexically_relative(root_);
    if (rel.empty() || *rel.begin() == "..") throw std::runtime_error("path escapes the snapshot: " + relative.string());
    return joined;
}

std::string ProjectSnapshot::read(const fs::path& relative) const { return read_file(resolve(relative).string()); }

void ProjectSnapshot::write(const fs::path& relative, const std::string& content) {
    write_file(resolve(relative).string(), content);
    dirty_ = true;
}

// ---- edits -----------------------------------------------------------------

namespace {

struct Lines {
    std::vector<std::string> lines;
    bool trailing_newline = true;

    static Lines of(const std::string& text) {
        Lines l;
        l.lines = split_lines(text);
        l.trailing_newline = text.empty() || text.back() == '\n';
        return l;
    }
    std::string text() const {
        std::string out = join(lines, "\n");
        if (trailing_newline && !lines.empty()) out += '\n';
        return out;
    }
};

void check_line(const Lines& f, int line, bool allow_end) {
    int limit = int(f.lines.size()) + (allow_end ? 1 : 0);
    if (line < 1 || line > limit) throw LineOutOfRange(line, int(f.lines.size()));
}

bool blank(std::string_view s) { return trim(s).empty(); }

}  // namespace

std::string apply_edits_to_text(const std::string& text, const std::vector<Edit>& edits, EditReport* report) {
    Lines f = Lines::of(text);
    EditReport r;
    for (const auto& e : edits) {
        switch (e.kind) {
            case EditKind::Replace: {
                check_line(f, e.line, false);
                auto& line = f.lines[std::size_t(e.line - 1)];
                auto pos = e.old_expr.empty() ? std::string::npos : line.find(e.old_expr);
                if (pos == std::string::npos) throw EditTargetNotFound(e.line, e.old_expr);
                line.replace(pos, e.old_expr.size(), e.new_expr);
                ++r.lines_changed;
                break;
            }
            case EditKind::Delete: {
                check_line(f, e.line, false);
                auto& line = f.lines[std::size_t(e.line - 1)];
                auto pos = e.old_expr.empty() ? std::string::npos : line.find(e.old_expr);
                if (pos == std::string::npos) throw EditTargetNotFound(e.line, e.old_expr);
                line.erase(pos, e.old_expr.size());
                if (blank(line)) {
                    f.lines.erase(f.lines.begin() + (e.line - 1));
                    ++r.lines_removed;
                } else {
                    ++r.lines_changed;
                }
                break;
            }
            case EditKind::Add: {
                // Adding at one past the end appends, indented like the last line.
                check_line(f, e.line, true);
                std::string indent;
                if (!f.lines.empty()) {
                    std::size_t ref = std::min<std::size_t>(std::size_t(e.line - 1), f.lines.size() - 1);
                    indent = std::string(leading_whitespace(f.lines[ref]));
                }
                auto added = split_lines(e.new_expr);
                if (added.empty()) added.emplace_back();
                std::size_t common = std::string::npos;
                for (const auto& a : added)
                    if (!blank(a)) common = std::min(common, leading_whitespace(a).size());
                if (common == std::string::npos) common = 0;
                std::vector<std::string> rendered;
                for (const auto& a : added)
                    rendered.push_back(blank(a) ? std::string() : indent + a.substr(common));
                f.lines.insert(f.lines.begin() + (e.line - 1), rendered.begin(), rendered.end());
                r.lines_added += int(rendered.size());
                break;
            }
        }
    }
    if (report) *report = r;
    return f.text();
}

EditReport apply_edits(ProjectSnapshot& snapshot, const fs::path& file, const std::vector<Edit>& edits) {
    EditReport report;
    std::string updated = apply_edits_to_text(snapshot.read(file), edits, &report);
    if (!edits.empty()) snapshot.write(file, updated);
    return report;
}

// ---- method patches --------------------------------------------------------

namespace {

// Models sometimes echo the numbered listing they were shown.
std::vector<std::string> strip_echoed_numbers(std::vector<std::string> lines) {
    static const std::regex numbered(R"(^\s*\d+( |$))");
    bool all = false;
    for (const auto& l : lines) {
        if (blank(l)) continue;
        if (!std::regex_search(l, numbered)) return lines;
        all = true;
    }
    if (!all) return lines;
    for (auto& l : lines) {
        if (blank(l)) continue;
        std::size_t i = 0;
        while (i < l.size() && (l[i] == ' ' || l[i] == '\t')) ++i;
        while (i < l.size() && std::isdigit(static_cast<unsigned char>(l[i]))) ++i;
        if (i < l.size()) ++i;
        l = l.substr(i);
    }
    return lines;
}

}  // namespace

std::string normalize_replacement(const BugContext& bug, const std::string& replacement) {
    std::string text = std::regex_replace(replacement, std::regex("\r\n"), "\n");
    auto lines = split_lines(text);
    for (auto& l : lines) l = std::string(trim_right(l));
    while (!lines.empty() && lines.front().empty()) lines.erase(lines.begin());
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ReplacementSyntaxError("replacement is empty");
    lines = strip_echoed_numbers(std::move(lines));

    const std::string base(leading_whitespace(lines.front()));
    std::vector<std::string> dedented;
    for (const auto& l : lines) {
        if (l.empty()) dedented.emplace_back();
        else if (l.compare(0, base.size(), base) == 0) dedented.push_back(l.substr(base.size()));
        else dedented.emplace_back(trim(l));
    }
    const std::string dedented_text = join_lines(dedented);
    if (auto err = py::syntax_error(dedented_text); !err.empty())
        throw ReplacementSyntaxError("replacement does not parse: " + err);
    auto module = py::parse_module(dedented_text);
    bool top_level_def = false;
    for (const auto& fn : module.functions)
        if (fn.indent.empty()) top_level_def = true;
    if (!top_level_def) throw ReplacementSyntaxError("replacement does not define a function");

    auto original = split_lines(bug.method_source);
    const std::string indent = original.empty() ? std::string() : std::string(leading_whitespace(original.front()));
    std::string out;
    for (const auto& l : dedented) {
        if (!l.empty()) out += indent + l;
        out += '\n';
    }
    return out;
}

std::string apply_method_patch(ProjectSnapshot& snapshot, const BugContext& bug, const std::string& replacement) {
    const std::string method = normalize_replacement(bug, replacement);
    const std::string before = snapshot.read(bug.buggy_file);
    Lines f = Lines::of(before);
    const auto span = bug.method_span;
    if (span.start < 1 || span.end < span.start || span.end > int(f.lines.size()))
        throw SpanMismatch("method span " + std::to_string(span.start) + "-" + std::to_string(span.end) +
                           " is outside " + bug.buggy_file.string());
    std::vector<std::string> current(f.lines.begin() + (span.start - 1), f.lines.begin() + span.end);
    if (current != split_lines(bug.method_source))
        throw SpanMismatch(bug.buggy_file.string() + " no longer matches the method at lines " +
                           std::to_string(span.start) + "-" + std::to_string(span.end));

    auto replacement_lines = split_lines(method);
    f.lines.erase(f.lines.begin() + (span.start - 1), f.lines.begin() + span.end);
    f.lines.insert(f.lines.begin() + (span.start - 1), replacement_lines.begin(), replacement_lines.end());
    const std::string after = f.text();
    if (after == before) return {};
    snapshot.write(bug.buggy_file, after);
    return unified_diff(before, after, bug.buggy_file.generic_string());
}

Observation run_failing_test(ExecutionAdapter& adapter, const ProjectSnapshot& snapshot, const BugContext& bug,
                             std::chrono::seconds timeout) {
    return execute_run(adapter, snapshot.root(), bug.failing_test_command, timeout);
}

}  // namespace autosd
