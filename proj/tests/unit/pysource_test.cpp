#include <gtest/gtest.h>

#include "autosd/pysource.hpp"

namespace autosd::py {
namespace {

const char* kSource =
    "import os\n"
    "\n"
    "def f(a, b):\n"
    "    \"\"\"doc\"\"\"\n"
    "    if a > b:\n"
    "        return a - b\n"
    "    elif a == b:\n"
    "        return 0\n"
    "    else:\n"
    "        return (b - a) * 2\n"
    "\n"
    "class C:\n"
    "    def g(self):\n"
    "        return [x for x in range(3)]  # comment\n";

TEST(PySource, FindsFunctionsWithSpans) {
    auto m = parse_module(kSource);
    const auto* f = m.find_function("f");
    ASSERT_NE(f, nullptr);
    EXPECT_EQ(f->first_line, 3);
    EXPECT_EQ(f->last_line, 10);
    const auto* g = m.find_function("g");
    ASSERT_NE(g, nullptr);
    EXPECT_EQ(g->first_line, 13);
    EXPECT_EQ(g->indent, "    ");
}

TEST(PySource, IfStatementClauses) {
    auto m = parse_module(kSource);
    ASSERT_EQ(m.ifs.size(), 1u);
    const auto& s = m.ifs[0];
    ASSERT_EQ(s.clauses.size(), 3u);
    EXPECT_EQ(s.clauses[0].keyword, "if");
    EXPECT_EQ(s.clauses[1].keyword, "elif");
    EXPECT_EQ(s.clauses[2].keyword, "else");
    EXPECT_EQ(s.first_line, 5);
    EXPECT_EQ(s.last_line, 10);
    EXPECT_EQ(m.text(m.exprs[s.clauses[0].condition].begin, m.exprs[s.clauses[0].condition].end), "a > b");
}

TEST(PySource, TokenizerDropsComments) {
    auto toks = tokenize("x = 1  # note\n");
    for (const auto& t : toks) EXPECT_NE(t.text("x = 1  # note\n").find('#'), 0u);
}

TEST(PySource, SyntaxErrors) {
    EXPECT_EQ(syntax_error(kSource), "");
    EXPECT_NE(syntax_error("def f(:\n    pass\n"), "");
    EXPECT_NE(syntax_error("def f():\nreturn 1\n"), "");
    EXPECT_NE(syntax_error("x = (1, 2\n"), "");
    EXPECT_NE(syntax_error("if x\n    y = 1\n"), "");
    EXPECT_NE(syntax_error("s = 'abc\n"), "");
}

TEST(PySource, StringPrefixesAndTripleQuotes) {
    EXPECT_EQ(syntax_error("a = rb'x' + f\"{y}\" + '''multi\nline'''\n"), "");
}

}  // namespace
}  // namespace autosd::py
