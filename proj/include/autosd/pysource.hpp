#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace autosd::py {

class ParseError : public std::runtime_error {
public:
    ParseError(int line, const std::string& message)
        : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

enum class TokenKind { Name, Number, String, Op, Newline, Indent, Dedent, EndMarker };

struct Token {
    TokenKind kind;
    std::size_t begin = 0;  // byte offsets into the source
    std::size_t end = 0;
    int line = 0;
    int end_line = 0;

    std::string_view text(std::string_view src) const { return src.substr(begin, end - begin); }
};

/// Python 3 tokenizer. Comments and non-logical newlines are dropped.
std::vector<Token> tokenize(std::string_view source);

enum class ExprKind { BinOp, Not, Group, Other };

struct ExprNode {
    ExprKind kind = ExprKind::Other;
    std::size_t begin = 0;  // byte span of the whole expression
    std::size_t end = 0;
    int line = 0;
    int op_token = -1;  // BinOp and Not
    int left = -1;      // BinOp: left operand; Not/Group: operand
    int right = -1;     // BinOp: right operand
};

struct IfClause {
    std::string keyword;  // if / elif / else
    int line = 0;
    int condition = -1;  // expression index, -1 for else
    bool inline_body = false;
    int body_first_line = 0;
    int body_last_line = 0;
    std::size_t inline_begin = 0;  // inline body byte span, excluding the newline
    std::size_t inline_end = 0;
    std::string body_indent;
};

struct IfStatement {
    std::vector<IfClause> clauses;
    int first_line = 0;
    int last_line = 0;
    std::string indent;
    std::size_t block_size = 0;  // statements in the enclosing block, this one included
};

struct FunctionDef {
    std::string name;
    int first_line = 0;  // the def line
    int last_line = 0;
    std::string indent;
};

/// Tokens plus the structure the mutators and the patch checker need.
struct Module {
    std::string source;
    std::vector<Token> tokens;
    std::vector<ExprNode> exprs;
    std::vector<IfStatement> ifs;
    std::vector<FunctionDef> functions;
    std::vector<std::size_t> line_starts;  // line_starts[n] = offset of line n (1-based); one past the last line too

    std::string_view text(const Token& t) const { return t.text(source); }
    std::string_view text(std::size_t begin, std::size_t end) const {
        return std::string_view(source).substr(begin, end - begin);
    }
    std::size_t line_start(int line) const;
    int line_count() const { return int(line_starts.size()) - 2; }
    const FunctionDef* find_function(std::string_view name) const;
};

Module parse_module(std::string source);

/// Empty string when the source parses; otherwise the parse error message.
std::string syntax_error(std::string_view source);

bool is_keyword(std::string_view word);

}  // namespace autosd::py
