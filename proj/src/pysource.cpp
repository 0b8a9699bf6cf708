#include "autosd/pysource.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace autosd::py {

namespace {

constexpr std::array kKeywords = {"False",  "None",   "True",    "and",      "as",       "assert", "async",
                                  "await",  "break",  "class",   "continue", "def",      "del",    "elif",
                                  "else",   "except", "finally", "for",      "from",     "global", "if",
                                  "import", "in",     "is",      "lambda",   "nonlocal", "not",    "or",
                                  "pass",   "raise",  "return",  "try",      "while",    "with",   "yield"};

// Longest first so that a prefix never shadows a longer operator.
constexpr std::array<std::string_view, 47> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", ">>", "<<", "<=", ">=", "==", "!=", "+=",
    "-=",  "*=",  "/=",  "%=",  "&=",  "|=", "^=", "@=", "+",  "-",  "*",  "/",  "%",  "@",  "&",  "|",
    "^",   "~",   "<",   ">",   "(",   ")",  "[",  "]",  "{",  "}",  ",",  ":",  ".",  ";",  "="};

bool is_name_start(unsigned char c) { return std::isalpha(c) || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_string_prefix(std::string_view p) {
    if (p.empty() || p.size() > 2) return false;
    std::string lower;
    for (char c : p) lower += char(std::tolower(static_cast<unsigned char>(c)));
    static constexpr std::array<std::string_view, 10> prefixes = {"r", "u", "b", "f", "br", "rb", "fr", "rf"};
    return std::find(prefixes.begin(), prefixes.end(), lower) != prefixes.end();
}

class Tokenizer {
public:
    explicit Tokenizer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<int> indents{0};
        int depth = 0;
        bool line_start = true;
        std::vector<char> brackets;

        while (true) {
            if (line_start && depth == 0) {
                int col = 0;
                while (pos_ < src_.size()) {
                    char c = src_[pos_];
                    if (c == ' ') ++col;
                    else if (c == '\t') col = (col / 8 + 1) * 8;
                    else if (c == '\f') col = 0;
                    else break;
                    ++pos_;
                }
                if (pos_ >= src_.size()) break;
                char c = src_[pos_];
                if (c == '\n' || c == '\r' || c == '#') {
                    while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                    if (pos_ < src_.size()) {
                        ++pos_;
                        ++line_;
                    }
                    continue;
                }
                if (c == '\\' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') {
                    pos_ += 2;
                    ++line_;
                    continue;
                }
                if (col > indents.back()) {
                    indents.push_back(col);
                    push(TokenKind::Indent, pos_, pos_);
                } else {
                    while (col < indents.back()) {
                        indents.pop_back();
                        push(TokenKind::Dedent, pos_, pos_);
                    }
                    if (col != indents.back()) throw ParseError(line_, "unindent does not match any outer indentation level");
                }
                line_start = false;
            }
            if (pos_ >= src_.size()) break;

            const char c = src_[pos_];
            const auto uc = static_cast<unsigned char>(c);
            if (c == ' ' || c == '\t' || c == '\f' || c == '\r') {
                ++pos_;
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
            } else if (c == '\\') {
                std::size_t next = pos_ + 1;
                if (next < src_.size() && src_[next] == '\r') ++next;
                if (next >= src_.size() || src_[next] != '\n') throw ParseError(line_, "unexpected character after line continuation");
                pos_ = next + 1;
                ++line_;
            } else if (c == '\n') {
                if (depth == 0) {
                    if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline &&
                        tokens_.back().kind != TokenKind::Indent && tokens_.back().kind != TokenKind::Dedent)
                        push(TokenKind::Newline, pos_, pos_ + 1);
                    line_start = true;
                }
                ++pos_;
                ++line_;
            } else if (is_name_start(uc)) {
                std::size_t start = pos_;
                while (pos_ < src_.size() && is_name_char(static_cast<unsigned char>(src_[pos_]))) ++pos_;
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'') &&
                    is_string_prefix(src_.substr(start, pos_ - start))) {
                    string_token(start);
                } else {
                    push(TokenKind::Name, start, pos_);
                }
            } else if (std::isdigit(uc) || (c == '.' && pos_ + 1 < src_.size() &&
                                            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                number_token();
            } else if (c == '"' || c == '\'') {
                string_token(pos_);
            } else {
                std::string_view rest = src_.substr(pos_);
                std::string_view op;
                for (auto candidate : kOperators) {
                    if (rest.substr(0, candidate.size()) == candidate) {
                        op = candidate;
                        break;
                    }
                }
                if (op.empty()) throw ParseError(line_, std::string("invalid character '") + c + "'");
                if (op == "(" || op == "[" || op == "{") {
                    brackets.push_back(op[0]);
                    ++depth;
                } else if (op == ")" || op == "]" || op == "}") {
                    static constexpr std::string_view open = "([{", close = ")]}";
                    if (brackets.empty() || open[close.find(op[0])] != brackets.back())
                        throw ParseError(line_, "unmatched '" + std::string(op) + "'");
                    brackets.pop_back();
                    --depth;
                }
                push(TokenKind::Op, pos_, pos_ + op.size());
                pos_ += op.size();
            }
        }
        if (depth > 0) throw ParseError(line_, "unexpected end of input inside brackets");
        if (!tokens_.empty() && tokens_.back().kind != TokenKind::Newline && tokens_.back().kind != TokenKind::Dedent)
            push(TokenKind::Newline, pos_, pos_);
        while (indents.size() > 1) {
            indents.pop_back();
            push(TokenKind::Dedent, pos_, pos_);
        }
        push(TokenKind::EndMarker, pos_, pos_);
        return std::move(tokens_);
    }

private:
    void push(TokenKind kind, std::size_t begin, std::size_t end, int start_line = -1) {
        Token t{kind, begin, end, start_line < 0 ? line_ : start_line, line_};
        tokens_.push_back(t);
    }

    void number_token() {
        std::size_t start = pos_;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
                ++pos_;
            } else if ((c == '+' || c == '-') && pos_ > start) {
                char prev = char(std::tolower(static_cast<unsigned char>(src_[pos_ - 1])));
                bool hex = src_.size() > start + 1 && (src_[start + 1] == 'x' || src_[start + 1] == 'X');
                if (prev == 'e' && !hex) ++pos_;
                else break;
            } else {
                break;
            }
        }
        push(TokenKind::Number, start, pos_);
    }

    void string_token(std::size_t start) {
        const int start_line = line_;
        const char q = src_[pos_];
        const bool triple = pos_ + 2 < src_.size() && src_[pos_ + 1] == q && src_[pos_ + 2] == q;
        pos_ += triple ? 3 : 1;
        while (true) {
            if (pos_ >= src_.size()) throw ParseError(start_line, "unterminated string literal");
            char c = src_[pos_];
            if (c == '\\') {
                if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '\n') ++line_;
                pos_ += 2;
                continue;
            }
            if (c == '\n') {
                if (!triple) throw ParseError(start_line, "unterminated string literal");
                ++line_;
                ++pos_;
                continue;
            }
            if (c == q) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (pos_ + 2 < src_.size() + 0 && src_[pos_ + 1] == q && src_[pos_ + 2] == q) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        push(TokenKind::String, start, pos_, start_line);
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    std::vector<Token> tokens_;
};

/// Recursive-descent parser producing the structure kept in Module.
class Parser {
public:
    explicit Parser(Module& m) : m_(m), t_(m.tokens) {}

    void run() {
        auto stmts = parse_block(/*until_dedent=*/false);
        (void)stmts;
    }

private:
    struct StmtInfo {
        int first_line;
        int last_line;
        int if_index = -1;
    };

    // ---- token helpers ---------------------------------------------------

    const Token& tok(std::size_t i) const { return t_[std::min(i, t_.size() - 1)]; }
    const Token& cur() const { return tok(i_); }
    std::string_view text(std::size_t i) const { return tok(i).text(m_.source); }
    bool is_op(std::size_t i, std::string_view op) const { return tok(i).kind == TokenKind::Op && text(i) == op; }
    bool is_name(std::size_t i, std::string_view word) const {
        return tok(i).kind == TokenKind::Name && text(i) == word;
    }
    bool at_limit() const {
        return i_ >= limit_ || cur().kind == TokenKind::Newline || cur().kind == TokenKind::EndMarker ||
               cur().kind == TokenKind::Indent || cur().kind == TokenKind::Dedent;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(cur().line, what + (at_limit() ? std::string(" at end of line")
                                                        : " near '" + std::string(text(i_)) + "'"));
    }

    void expect_op(std::string_view op) {
        if (at_limit() || !is_op(i_, op)) fail("expected '" + std::string(op) + "'");
        ++i_;
    }

    int add(ExprNode n) {
        m_.exprs.push_back(n);
        return int(m_.exprs.size()) - 1;
    }

    int other(std::size_t first_tok, std::size_t last_tok) {
        ExprNode n;
        n.kind = ExprKind::Other;
        n.begin = tok(first_tok).begin;
        n.end = tok(last_tok).end;
        n.line = tok(first_tok).line;
        return add(n);
    }

    /// Runs fn with the token limit lowered to `limit` (exclusive).
    template <typename Fn>
    void with_limit(std::size_t limit, Fn&& fn) {
        std::size_t saved = limit_;
        limit_ = std::min(limit_, limit);
        fn();
        limit_ = saved;
    }

    // ---- statements ------------------------------------------------------

    std::vector<StmtInfo> parse_block(bool until_dedent) {
        std::vector<StmtInfo> stmts;
        while (true) {
            const Token& t = cur();
            if (t.kind == TokenKind::EndMarker) {
                if (until_dedent) break;
                break;
            }
            if (t.kind == TokenKind::Dedent) {
                if (!until_dedent) fail("unexpected dedent");
                ++i_;
                break;
            }
            if (t.kind == TokenKind::Indent) fail("unexpected indent");
            if (t.kind == TokenKind::Newline) {
                ++i_;
                continue;
            }
            stmts.push_back(parse_statement());
        }
        std::size_t n = stmts.size();
        for (const auto& s : stmts)
            if (s.if_index >= 0) m_.ifs[std::size_t(s.if_index)].block_size = n;
        return stmts;
    }

    static bool is_compound_keyword(std::string_view w) {
        return w == "if" || w == "for" || w == "while" || w == "try" || w == "with" || w == "def" || w == "class";
    }

    bool starts_soft_compound() const {
        // `match x:` / `case y:` followed by an indented block.
        if (!(is_name(i_, "match") || is_name(i_, "case"))) return false;
        std::size_t j = i_ + 1;
        int depth = 0;
        while (tok(j).kind != TokenKind::Newline && tok(j).kind != TokenKind::EndMarker) {
            if (tok(j).kind == TokenKind::Op) {
                auto s = text(j);
                if (s == "(" || s == "[" || s == "{") ++depth;
                else if (s == ")" || s == "]" || s == "}") --depth;
                else if (s == "=" && depth == 0) return false;
            }
            ++j;
        }
        return j > i_ + 1 && is_op(j - 1, ":") && tok(j + 1).kind == TokenKind::Indent;
    }

    StmtInfo parse_statement() {
        if (cur().kind == TokenKind::Name) {
            auto w = text(i_);
            if (w == "async" && (is_name(i_ + 1, "def") || is_name(i_ + 1, "for") || is_name(i_ + 1, "with"))) {
                ++i_;
                return parse_compound();
            }
            if (is_compound_keyword(w) || starts_soft_compound()) return parse_compound();
            if (w == "elif" || w == "else" || w == "except" || w == "finally") fail("unexpected clause keyword");
        }
        std::size_t first = i_;
        parse_simple_line();
        return {tok(first).line, tok(last_content_token()).end_line};
    }

    /// Index of the last token before the Newline that ended the previous line.
    std::size_t last_content_token() const {
        std::size_t j = i_;
        while (j > 0 && (tok(j - 1).kind == TokenKind::Newline || tok(j - 1).kind == TokenKind::Dedent ||
                         tok(j - 1).kind == TokenKind::Indent))
            --j;
        return j == 0 ? 0 : j - 1;
    }

    /// Small statements separated by ';' up to and including the Newline.
    void parse_simple_line() {
        while (true) {
            std::size_t end = i_;
            int depth = 0;
            while (tok(end).kind != TokenKind::Newline && tok(end).kind != TokenKind::EndMarker) {
                if (tok(end).kind == TokenKind::Op) {
                    auto s = text(end);
                    if (s == "(" || s == "[" || s == "{") ++depth;
                    else if (s == ")" || s == "]" || s == "}") --depth;
                    else if (s == ";" && depth == 0) break;
                }
                ++end;
            }
            with_limit(end, [&] { parse_small_statement(); });
            i_ = end;
            if (is_op(i_, ";")) {
                ++i_;
                if (tok(i_).kind == TokenKind::Newline) break;
                continue;
            }
            break;
        }
        if (tok(i_).kind == TokenKind::Newline) ++i_;
        else if (tok(i_).kind != TokenKind::EndMarker) fail("expected end of statement");
    }

    void parse_small_statement() {
        if (at_limit()) return;
        if (cur().kind == TokenKind::Name) {
            auto w = text(i_);
            if (w == "pass" || w == "break" || w == "continue" || w == "global" || w == "nonlocal" ||
                w == "import" || w == "from") {
                i_ = limit_;
                return;
            }
            if (w == "return" || w == "del" || w == "assert" || w == "raise") ++i_;
        }
        if (is_op(i_, "@")) ++i_;  // decorator
        parse_loose_sequence();
    }

    /// Expressions joined by assignment-ish connectors: `a, *b = c += d`, `x: int = 3`,
    /// `raise E from e`, `yield from g`.
    void parse_loose_sequence() {
        while (!at_limit()) {
            const Token& t = cur();
            auto s = text(i_);
            if (t.kind == TokenKind::Op &&
                (s == "=" || s == "," || s == ":" || s == "*" || s == "**" ||
                 (s.size() >= 2 && s.back() == '=' && s != "==" && s != "<=" && s != ">=" && s != "!="))) {
                ++i_;
                continue;
            }
            if (t.kind == TokenKind::Name && (s == "from" || s == "yield" || s == "as")) {
                ++i_;
                continue;
            }
            parse_test();
        }
    }

    void parse_expr_list(bool no_in = false) {
        while (!at_limit()) {
            if (is_op(i_, ",") || is_op(i_, "*")) {
                ++i_;
                continue;
            }
            if (no_in && is_name(i_, "in")) return;
            std::size_t before = i_;
            if (no_in) parse_or(true);
            else parse_test();
            if (i_ == before) fail("expected expression");
            if (!is_op(i_, ",")) return;
        }
    }

    /// Index of the header-terminating ':' at bracket depth 0.
    std::size_t find_header_colon(std::size_t from) const {
        int depth = 0;
        for (std::size_t j = from;; ++j) {
            const Token& t = tok(j);
            if (t.kind == TokenKind::Newline || t.kind == TokenKind::EndMarker)
                throw ParseError(t.line, "expected ':' ending the compound statement header");
            if (t.kind != TokenKind::Op) continue;
            auto s = text(j);
            if (s == "(" || s == "[" || s == "{") ++depth;
            else if (s == ")" || s == "]" || s == "}") --depth;
            else if (s == ":" && depth == 0) return j;
        }
    }

    struct Body {
        bool inline_body = false;
        int first_line = 0;
        int last_line = 0;
        std::size_t inline_begin = 0;
        std::size_t inline_end = 0;
        std::string indent;
    };

    Body parse_body() {
        Body b;
        if (cur().kind == TokenKind::Newline) {
            ++i_;
            if (cur().kind != TokenKind::Indent) fail("expected an indented block");
            ++i_;
            b.first_line = cur().line;
            std::size_t ls = m_.line_start(b.first_line);
            std::size_t k = ls;
            while (k < m_.source.size() && (m_.source[k] == ' ' || m_.source[k] == '\t')) ++k;
            b.indent = m_.source.substr(ls, k - ls);
            auto stmts = parse_block(/*until_dedent=*/true);
            if (stmts.empty()) fail("empty block");
            b.last_line = stmts.back().last_line;
        } else {
            b.inline_body = true;
            b.first_line = cur().line;
            b.inline_begin = cur().begin;
            parse_simple_line();
            std::size_t last = last_content_token();
            b.inline_end = tok(last).end;
            b.last_line = tok(last).end_line;
        }
        return b;
    }

    StmtInfo parse_compound() {
        const std::size_t first = i_;
        const std::string kw(text(i_));
        StmtInfo info{tok(first).line, 0};

        if (kw == "if") {
            IfStatement st;
            st.first_line = tok(first).line;
            {
                std::size_t ls = m_.line_start(st.first_line);
                st.indent = m_.source.substr(ls, tok(first).begin - ls);
            }
            while (true) {
                IfClause clause;
                clause.keyword = std::string(text(i_));
                clause.line = cur().line;
                std::size_t colon = find_header_colon(i_ + 1);
                ++i_;
                if (clause.keyword != "else") {
                    with_limit(colon, [&] {
                        clause.condition = parse_test();
                        if (!at_limit()) fail("unexpected token in condition");
                    });
                } else if (i_ != colon) {
                    fail("expected ':' after else");
                }
                i_ = colon + 1;
                Body body = parse_body();
                clause.inline_body = body.inline_body;
                clause.body_first_line = body.first_line;
                clause.body_last_line = body.last_line;
                clause.inline_begin = body.inline_begin;
                clause.inline_end = body.inline_end;
                clause.body_indent = body.indent;
                st.clauses.push_back(clause);
                st.last_line = body.last_line;
                if (clause.keyword != "else" && (is_name(i_, "elif") || is_name(i_, "else"))) continue;
                break;
            }
            info.last_line = st.last_line;
            m_.ifs.push_back(std::move(st));
            info.if_index = int(m_.ifs.size()) - 1;
            return info;
        }

        std::vector<std::string> continuations;
        if (kw == "for" || kw == "while") continuations = {"else"};
        else if (kw == "try") continuations = {"except", "else", "finally"};

        FunctionDef fn;
        int last_line = 0;
        bool first_clause = true;
        while (true) {
            const std::string clause_kw(text(i_));
            std::size_t colon = find_header_colon(i_ + 1);
            ++i_;
            with_limit(colon, [&] { parse_header(clause_kw); });
            i_ = colon + 1;
            Body body = parse_body();
            last_line = body.last_line;
            if (first_clause && kw == "def") {
                fn.name = std::string(text(first + 1));
                fn.first_line = tok(first).line;
                std::size_t ls = m_.line_start(fn.first_line);
                std::size_t k = ls;
                while (k < m_.source.size() && (m_.source[k] == ' ' || m_.source[k] == '\t')) ++k;
                fn.indent = m_.source.substr(ls, k - ls);
            }
            first_clause = false;
            if (cur().kind == TokenKind::Name &&
                std::find(continuations.begin(), continuations.end(), text(i_)) != continuations.end())
                continue;
            break;
        }
        if (kw == "def") {
            fn.last_line = last_line;
            m_.functions.push_back(fn);
        }
        info.last_line = last_line;
        return info;
    }

    void parse_header(const std::string& kw) {
        if (kw == "while") {
            parse_test();
        } else if (kw == "for") {
            parse_expr_list(/*no_in=*/true);
            if (!is_name(i_, "in")) fail("expected 'in'");
            ++i_;
            parse_expr_list();
        } else if (kw == "with" || kw == "except") {
            parse_loose_sequence();
        } else if (kw == "def") {
            if (cur().kind != TokenKind::Name) fail("expected function name");
            ++i_;
            if (!is_op(i_, "(")) fail("expected '('");
            ++i_;
            parse_items(")");
            if (is_op(i_, "->")) {
                ++i_;
                parse_test();
            }
        } else if (kw == "class") {
            if (cur().kind != TokenKind::Name) fail("expected class name");
            ++i_;
            if (is_op(i_, "(")) {
                ++i_;
                parse_items(")");
            }
        } else {
            // try / else / finally have no header; match / case headers are not analysed.
            i_ = limit_;
            return;
        }
        if (!at_limit()) fail("unexpected token in header");
    }

    // ---- expressions -----------------------------------------------------

    int parse_test(bool allow_ternary = true) {
        if (at_limit()) fail("expected expression");
        const std::size_t first = i_;
        if (is_name(i_, "lambda")) {
            ++i_;
            int depth = 0;
            while (!at_limit()) {
                if (cur().kind == TokenKind::Op) {
                    auto s = text(i_);
                    if (s == "(" || s == "[" || s == "{") ++depth;
                    else if (s == ")" || s == "]" || s == "}") --depth;
                    else if (s == ":" && depth == 0) break;
                }
                ++i_;
            }
            expect_op(":");
            parse_test(allow_ternary);
            return other(first, i_ - 1);
        }
        int node = parse_or(false);
        if (allow_ternary && !at_limit() && is_name(i_, "if")) {
            ++i_;
            parse_or(false);
            if (!is_name(i_, "else")) fail("expected 'else'");
            ++i_;
            parse_test(true);
            node = other(first, i_ - 1);
        }
        if (!at_limit() && is_op(i_, ":=")) {
            ++i_;
            parse_test(true);
            node = other(first, i_ - 1);
        }
        return node;
    }

    int parse_or(bool no_in) {
        std::size_t first = i_;
        int node = parse_and(no_in);
        while (!at_limit() && is_name(i_, "or")) {
            ++i_;
            parse_and(no_in);
            node = other(first, i_ - 1);
        }
        return node;
    }

    int parse_and(bool no_in) {
        std::size_t first = i_;
        int node = parse_not(no_in);
        while (!at_limit() && is_name(i_, "and")) {
            ++i_;
            parse_not(no_in);
            node = other(first, i_ - 1);
        }
        return node;
    }

    int parse_not(bool no_in) {
        if (!at_limit() && is_name(i_, "not")) {
            std::size_t first = i_;
            ++i_;
            int operand = parse_not(no_in);
            ExprNode n;
            n.kind = ExprKind::Not;
            n.begin = tok(first).begin;
            n.end = m_.exprs[std::size_t(operand)].end;
            n.line = tok(first).line;
            n.op_token = int(first);
            n.left = operand;
            return add(n);
        }
        return parse_comparison(no_in);
    }

    bool comparison_operator(bool no_in, std::size_t& width) const {
        if (at_limit()) return false;
        width = 1;
        if (cur().kind == TokenKind::Op) {
            auto s = text(i_);
            return s == "<" || s == ">" || s == "==" || s == ">=" || s == "<=" || s == "!=";
        }
        if (is_name(i_, "in")) return !no_in;
        if (is_name(i_, "is")) {
            if (is_name(i_ + 1, "not")) width = 2;
            return true;
        }
        if (is_name(i_, "not") && is_name(i_ + 1, "in")) {
            width = 2;
            return true;
        }
        return false;
    }

    int parse_comparison(bool no_in) {
        std::size_t first = i_;
        int node = parse_binary(0);
        std::size_t width = 0;
        while (comparison_operator(no_in, width)) {
            i_ += width;
            parse_binary(0);
            node = other(first, i_ - 1);
        }
        return node;
    }

    static constexpr std::array<std::array<std::string_view, 5>, 6> kBinaryLevels = {{
        {"|", "", "", "", ""},
        {"^", "", "", "", ""},
        {"&", "", "", "", ""},
        {"<<", ">>", "", "", ""},
        {"+", "-", "", "", ""},
        {"*", "/", "//", "%", "@"},
    }};

    bool binary_at_level(std::size_t level) const {
        if (at_limit() || cur().kind != TokenKind::Op) return false;
        auto s = text(i_);
        for (auto op : kBinaryLevels[level])
            if (!op.empty() && s == op) return true;
        return false;
    }

    int make_binop(int left, std::size_t op, int right) {
        ExprNode n;
        n.kind = ExprKind::BinOp;
        n.begin = m_.exprs[std::size_t(left)].begin;
        n.end = m_.exprs[std::size_t(right)].end;
        n.line = m_.exprs[std::size_t(left)].line;
        n.op_token = int(op);
        n.left = left;
        n.right = right;
        return add(n);
    }

    int parse_binary(std::size_t level) {
        if (level == kBinaryLevels.size()) return parse_factor();
        int node = parse_binary(level + 1);
        while (binary_at_level(level)) {
            std::size_t op = i_++;
            int right = parse_binary(level + 1);
            node = make_binop(node, op, right);
        }
        return node;
    }

    int parse_factor() {
        if (!at_limit() && (is_op(i_, "-") || is_op(i_, "+") || is_op(i_, "~"))) {
            std::size_t first = i_++;
            parse_factor();
            return other(first, i_ - 1);
        }
        return parse_power();
    }

    int parse_power() {
        std::size_t first = i_;
        if (is_name(i_, "await")) ++i_;
        int node = parse_primary();
        if (i_ != first + 0 && is_name(first, "await")) node = other(first, i_ - 1);
        if (!at_limit() && is_op(i_, "**")) {
            std::size_t op = i_++;
            int right = parse_factor();
            node = make_binop(node, op, right);
        }
        return node;
    }

    int parse_primary() {
        std::size_t first = i_;
        int node = parse_atom();
        while (!at_limit()) {
            if (is_op(i_, ".")) {
                ++i_;
                if (at_limit() || cur().kind != TokenKind::Name) fail("expected attribute name");
                ++i_;
            } else if (is_op(i_, "(")) {
                ++i_;
                parse_items(")");
            } else if (is_op(i_, "[")) {
                ++i_;
                parse_items("]");
            } else {
                break;
            }
            node = other(first, i_ - 1);
        }
        return node;
    }

    int parse_atom() {
        if (at_limit()) fail("expected expression");
        const Token& t = cur();
        const std::size_t first = i_;
        switch (t.kind) {
            case TokenKind::Number:
                ++i_;
                return other(first, first);
            case TokenKind::String:
                while (!at_limit() && cur().kind == TokenKind::String) ++i_;
                return other(first, i_ - 1);
            case TokenKind::Name: {
                auto w = text(i_);
                if (is_keyword(w) && w != "True" && w != "False" && w != "None") fail("unexpected keyword");
                ++i_;
                return other(first, first);
            }
            case TokenKind::Op: {
                auto s = text(i_);
                if (s == "...") {
                    ++i_;
                    return other(first, first);
                }
                if (s == "(" || s == "[" || s == "{") {
                    static constexpr std::string_view open = "([{", close = ")]}";
                    std::string closing(1, close[open.find(s[0])]);
                    ++i_;
                    std::size_t inner_first = i_;
                    int items = parse_items(closing);
                    ExprNode n;
                    n.kind = s == "(" && items == 1 && !group_was_tuple_ ? ExprKind::Group : ExprKind::Other;
                    n.begin = tok(first).begin;
                    n.end = tok(i_ - 1).end;
                    n.line = tok(first).line;
                    if (n.kind == ExprKind::Group) n.left = last_item_;
                    (void)inner_first;
                    return add(n);
                }
                break;
            }
            default: break;
        }
        fail("expected expression");
    }

    /// Parses bracket contents through the closing token; returns the number of
    /// top-level items. Tolerates calls, slices, dicts, comprehensions and parameter lists.
    int parse_items(const std::string& closing) {
        std::size_t close_idx = i_;
        {
            int depth = 0;
            for (;; ++close_idx) {
                const Token& t = tok(close_idx);
                if (t.kind == TokenKind::EndMarker) throw ParseError(t.line, "unclosed bracket");
                if (t.kind != TokenKind::Op) continue;
                auto s = text(close_idx);
                if (s == "(" || s == "[" || s == "{") ++depth;
                else if (s == ")" || s == "]" || s == "}") {
                    if (depth == 0) break;
                    --depth;
                }
            }
            if (text(close_idx) != closing) throw ParseError(tok(close_idx).line, "mismatched bracket");
        }
        int items = 0;
        bool saw_comma = false;
        int last_item = -1;
        std::size_t saved_limit = limit_;
        limit_ = close_idx;
        while (i_ < close_idx) {
            const Token& t = cur();
            auto s = text(i_);
            if (t.kind == TokenKind::Newline || t.kind == TokenKind::Indent || t.kind == TokenKind::Dedent) {
                ++i_;
                continue;
            }
            if (t.kind == TokenKind::Op && (s == "," || s == ":" || s == "=" || s == "*" || s == "**" || s == "/")) {
                if (s == ",") saw_comma = true;
                ++i_;
                continue;
            }
            if (t.kind == TokenKind::Name && s == "for") {
                saw_comma = true;  // comprehensions are never plain groups
                ++i_;
                parse_expr_list(/*no_in=*/true);
                if (!is_name(i_, "in")) fail("expected 'in'");
                ++i_;
                parse_or(false);
                continue;
            }
            if (t.kind == TokenKind::Name && s == "async" && is_name(i_ + 1, "for")) {
                ++i_;
                continue;
            }
            if (t.kind == TokenKind::Name && s == "if") {
                ++i_;
                parse_or(false);
                continue;
            }
            if (t.kind == TokenKind::Name && s == "yield") {
                saw_comma = true;
                ++i_;
                if (is_name(i_, "from")) ++i_;
                continue;
            }
            std::size_t before = i_;
            last_item = parse_test();
            ++items;
            if (i_ == before) fail("expected expression");
        }
        limit_ = saved_limit;
        i_ = close_idx + 1;
        group_was_tuple_ = saw_comma;
        last_item_ = last_item;
        return items;
    }

    Module& m_;
    const std::vector<Token>& t_;
    std::size_t i_ = 0;
    std::size_t limit_ = SIZE_MAX;
    bool group_was_tuple_ = false;
    int last_item_ = -1;
};

}  // namespace

bool is_keyword(std::string_view word) {
    return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> tokenize(std::string_view source) { return Tokenizer(source).run(); }

std::size_t Module::line_start(int line) const {
    if (line < 1) return 0;
    if (std::size_t(line) >= line_starts.size()) return source.size();
    return line_starts[std::size_t(line)];
}

const FunctionDef* Module::find_function(std::string_view name) const {
    for (const auto& f : functions)
        if (f.name == name) return &f;
    return nullptr;
}

Module parse_module(std::string source) {
    Module m;
    m.source = std::move(source);
    m.line_starts = {0, 0};
    for (std::size_t i = 0; i < m.source.size(); ++i)
        if (m.source[i] == '\n' && i + 1 < m.source.size()) m.line_starts.push_back(i + 1);
    m.line_starts.push_back(m.source.size());
    m.tokens = tokenize(m.source);
    Parser(m).run();
    return m;
}

std::string syntax_error(std::string_view source) {
    try {
        parse_module(std::string(source));
        return {};
    } catch (const ParseError& e) {
        return e.what();
    }
}

}  // namespace autosd::py
