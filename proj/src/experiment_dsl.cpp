#include "autosd/experiment_dsl.hpp"

#include <cctype>
#include <optional>
#include <regex>

#include "autosd/text_util.hpp"

namespace autosd {

namespace {

std::string describe_found(std::string_view input, std::size_t offset) {
    if (offset >= input.size()) return "end of input";
    std::string_view rest = input.substr(offset, 12);
    return "'" + std::string(rest) + (offset + 12 < input.size() ? "...'" : "'");
}

std::size_t clamp_offset(std::string_view input, std::size_t offset) {
    if (input.empty()) return 0;
    return std::min(offset, input.size() - 1);
}

class Cursor {
public:
    explicit Cursor(std::string_view input) : in_(input) {}

    std::string_view input() const { return in_; }
    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) { pos_ = p; }
    bool at_end() const { return pos_ >= in_.size(); }
    char peek() const { return at_end() ? '\0' : in_[pos_]; }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(in_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(std::vector<std::string> expected) const { fail_at(pos_, std::move(expected)); }
    [[noreturn]] void fail_at(std::size_t at, std::vector<std::string> expected) const {
        throw DslSyntaxError(clamp_offset(in_, at), std::move(expected), describe_found(in_, at));
    }

    /// Matches a case-insensitive keyword that is not followed by an identifier character.
    bool keyword(std::string_view kw) {
        skip_ws();
        if (!starts_with_ci(in_.substr(pos_), kw)) return false;
        std::size_t end = pos_ + kw.size();
        if (end < in_.size()) {
            char c = in_[end];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') return false;
        }
        pos_ = end;
        return true;
    }

    bool punct(char c) {
        skip_ws();
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    void expect_punct(char c) {
        if (!punct(c)) fail({std::string("'") + c + "'"});
    }

    int integer() {
        skip_ws();
        std::size_t start = pos_;
        long long value = 0;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            value = value * 10 + (peek() - '0');
            if (value > 1'000'000'000) fail_at(start, {"line number"});
            ++pos_;
        }
        if (pos_ == start) fail({"line number"});
        return int(value);
    }

    std::string quoted() {
        skip_ws();
        if (peek() != '"') fail({"double-quoted string"});
        std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (true) {
            if (at_end()) fail_at(start, {"closing '\"'"});
            char c = in_[pos_++];
            if (c == '"') break;
            if (c == '\\' && !at_end() && (peek() == '"' || peek() == '\\')) {
                out += in_[pos_++];
                continue;
            }
            out += c;
        }
        return out;
    }

private:
    std::string_view in_;
    std::size_t pos_ = 0;
};

bool is_stop_keyword(Cursor& c) { return c.keyword("stop") || c.keyword("break") || c.keyword("b"); }
bool is_run_keyword(Cursor& c) { return c.keyword("run") || c.keyword("continue") || c.keyword("c"); }
bool is_print_keyword(Cursor& c) { return c.keyword("print") || c.keyword("p"); }

bool looks_like_edit(Cursor& c) {
    std::size_t save = c.pos();
    bool hit = false;
    for (std::string_view kw : {"REPLACE", "ADD", "DEL"}) {
        c.seek(save);
        if (c.keyword(kw) && c.punct('(')) {
            hit = true;
            break;
        }
    }
    c.seek(save);
    return hit;
}

bool looks_like_probe(Cursor& c) {
    std::size_t save = c.pos();
    bool hit = is_stop_keyword(c);
    c.seek(save);
    return hit;
}

bool separator(Cursor& c) {
    if (!c.punct(';')) return false;
    if (c.peek() == ';') c.seek(c.pos() + 1);
    return true;
}

/// Returns the offset of the first ';' outside quotes and brackets, or npos.
std::size_t top_level_semicolon(std::string_view s) {
    int depth = 0;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (quote) {
            if (ch == '\\') ++i;
            else if (ch == quote) quote = 0;
            continue;
        }
        switch (ch) {
            case '"':
            case '\'': quote = ch; break;
            case '(':
            case '[':
            case '{': ++depth; break;
            case ')':
            case ']':
            case '}': --depth; break;
            case ';':
                if (depth <= 0) return i;
                break;
            default: break;
        }
    }
    return std::string_view::npos;
}

DebuggerProbe parse_probe(Cursor& c) {
    if (!is_stop_keyword(c)) c.fail({"stop", "break", "b"});
    c.keyword("at");
    c.skip_ws();

    std::size_t loc_start = c.pos();
    while (!c.at_end() && !std::isspace(static_cast<unsigned char>(c.peek())) && c.peek() != ';')
        c.seek(c.pos() + 1);
    std::string_view loc = c.input().substr(loc_start, c.pos() - loc_start);
    std::size_t colon = loc.rfind(':');
    if (loc.empty() || colon == std::string_view::npos || colon == 0 || colon + 1 == loc.size())
        c.fail_at(loc_start, {"PATH:LINE"});
    DebuggerProbe probe;
    probe.location.file = std::string(loc.substr(0, colon));
    {
        Cursor line_cursor(loc.substr(colon + 1));
        std::size_t digits = 0;
        for (char ch : loc.substr(colon + 1)) {
            if (!std::isdigit(static_cast<unsigned char>(ch))) c.fail_at(loc_start + colon + 1, {"line number"});
            ++digits;
        }
        if (digits > 9) c.fail_at(loc_start + colon + 1, {"line number"});
        probe.location.line = line_cursor.integer();
    }

    if (!separator(c)) c.fail({"';'", "';;'"});
    if (looks_like_edit(c)) throw MixedScriptError("edit command inside a debugger probe", clamp_offset(c.input(), c.pos()));
    if (!is_run_keyword(c)) c.fail({"run", "continue", "c"});
    if (!separator(c)) c.fail({"';'", "';;'"});
    if (looks_like_edit(c)) throw MixedScriptError("edit command inside a debugger probe", clamp_offset(c.input(), c.pos()));
    if (!is_print_keyword(c)) c.fail({"print", "p"});
    c.skip_ws();

    std::size_t expr_start = c.pos();
    std::string_view rest = c.input().substr(expr_start);
    std::size_t semi = top_level_semicolon(rest);
    if (semi != std::string_view::npos) c.fail_at(expr_start + semi, {"end of input"});

    static const std::regex edit_tail(R"(\bAND\s+(REPLACE\s*\(|ADD\s*\(|DEL\s*\(|RUN\s*$))");
    std::string rest_str(rest);
    std::smatch m;
    if (std::regex_search(rest_str, m, edit_tail))
        throw MixedScriptError("edit command inside a debugger probe",
                               clamp_offset(c.input(), expr_start + std::size_t(m.position(0))));

    std::string_view expr = trim(rest);
    if (expr.empty()) c.fail({"expression"});
    probe.expression = std::string(expr);
    c.seek(c.input().size());
    return probe;
}

Edit parse_edit(Cursor& c) {
    Edit edit;
    if (c.keyword("REPLACE")) {
        c.expect_punct('(');
        edit.kind = EditKind::Replace;
        edit.line = c.integer();
        c.expect_punct(',');
        edit.old_expr = c.quoted();
        c.expect_punct(',');
        edit.new_expr = c.quoted();
    } else if (c.keyword("ADD")) {
        c.expect_punct('(');
        edit.kind = EditKind::Add;
        edit.line = c.integer();
        c.expect_punct(',');
        edit.new_expr = c.quoted();
    } else if (c.keyword("DEL")) {
        c.expect_punct('(');
        edit.kind = EditKind::Delete;
        edit.line = c.integer();
        c.expect_punct(',');
        edit.old_expr = c.quoted();
    } else {
        if (looks_like_probe(c)) throw MixedScriptError("debugger command inside an edit script", clamp_offset(c.input(), c.pos()));
        c.fail({"REPLACE", "ADD", "DEL", "RUN"});
    }
    c.expect_punct(')');
    return edit;
}

EditScript parse_edits(Cursor& c) {
    EditScript script;
    {
        std::size_t save = c.pos();
        if (c.keyword("RUN")) {
            c.skip_ws();
            if (c.at_end()) {
                script.run_test = true;
                return script;
            }
            c.seek(save);
        }
    }
    script.edits.push_back(parse_edit(c));
    while (true) {
        c.skip_ws();
        if (c.at_end()) break;
        if (c.peek() == ';' ) {
            std::size_t at = c.pos();
            Cursor probe_tail = c;
            separator(probe_tail);
            if (looks_like_probe(probe_tail) || is_run_keyword(probe_tail) || is_print_keyword(probe_tail))
                throw MixedScriptError("debugger command inside an edit script", clamp_offset(c.input(), at));
        }
        if (!c.keyword("AND")) {
            if (looks_like_probe(c)) throw MixedScriptError("debugger command inside an edit script", clamp_offset(c.input(), c.pos()));
            c.fail({"AND", "end of input"});
        }
        std::size_t save = c.pos();
        if (c.keyword("RUN")) {
            c.skip_ws();
            if (!c.at_end()) c.fail({"end of input"});
            script.run_test = true;
            break;
        }
        c.seek(save);
        script.edits.push_back(parse_edit(c));
    }
    return script;
}

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    out += '"';
    return out;
}

}  // namespace

DslSyntaxError::DslSyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& found)
    : ExperimentParseError("syntax error at offset " + std::to_string(offset) + ": expected " +
                               join(expected, " or ") + ", found " + found,
                           offset),
      expected_(std::move(expected)) {}

ExperimentScript parse_experiment(std::string_view raw) {
    Cursor c(raw);
    c.skip_ws();
    if (c.at_end()) c.fail({"debugger probe", "edit script"});
    if (looks_like_probe(c)) return parse_probe(c);
    return parse_edits(c);
}

std::string_view to_string(EditKind kind) {
    switch (kind) {
        case EditKind::Replace: return "REPLACE";
        case EditKind::Add: return "ADD";
        case EditKind::Delete: return "DEL";
    }
    return "?";
}

std::string render_experiment(const ExperimentScript& script) {
    if (const auto* probe = std::get_if<DebuggerProbe>(&script)) {
        return "stop at " + probe->location.file + ":" + std::to_string(probe->location.line) +
               " ; run ; print " + probe->expression;
    }
    const auto& edits = std::get<EditScript>(script);
    std::vector<std::string> parts;
    for (const auto& e : edits.edits) {
        std::string part = std::string(to_string(e.kind)) + "(" + std::to_string(e.line) + ", ";
        switch (e.kind) {
            case EditKind::Replace: part += quote(e.old_expr) + ", " + quote(e.new_expr); break;
            case EditKind::Add: part += quote(e.new_expr); break;
            case EditKind::Delete: part += quote(e.old_expr); break;
        }
        parts.push_back(part + ")");
    }
    if (edits.run_test) parts.emplace_back("RUN");
    return join(parts, " AND ");
}

}  // namespace autosd
