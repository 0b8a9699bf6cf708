#include <gtest/gtest.h>

#include "autosd/unified_diff.hpp"

namespace autosd {
namespace {

TEST(UnifiedDiff, EqualTextsGiveEmptyDiff) { EXPECT_EQ(unified_diff("a\nb\n", "a\nb\n", "f.py"), ""); }

TEST(UnifiedDiff, SingleLineChange) {
    std::string old_text = "1\n2\n3\n4\n5\n6\n7\n8\n";
    std::string new_text = "1\n2\n3\n4\nfive\n6\n7\n8\n";
    EXPECT_EQ(unified_diff(old_text, new_text, "f.py"),
              "--- a/f.py\n+++ b/f.py\n@@ -2,7 +2,7 @@\n 2\n 3\n 4\n-5\n+five\n 6\n 7\n 8\n");
}

TEST(UnifiedDiff, SeparateHunks) {
    std::string old_text, new_text;
    for (int i = 1; i <= 20; ++i) {
        old_text += std::to_string(i) + "\n";
        new_text += (i == 2 || i == 18 ? "x" : std::to_string(i)) + "\n";
    }
    EXPECT_EQ(unified_diff(old_text, new_text, "f.py"),
              "--- a/f.py\n+++ b/f.py\n"
              "@@ -1,5 +1,5 @@\n 1\n-2\n+x\n 3\n 4\n 5\n"
              "@@ -15,6 +15,6 @@\n 15\n 16\n 17\n-18\n+x\n 19\n 20\n");
}

TEST(UnifiedDiff, InsertionIntoEmptyFile) {
    EXPECT_EQ(unified_diff("", "a\n", "n.py"), "--- a/n.py\n+++ b/n.py\n@@ -0,0 +1 @@\n+a\n");
}

TEST(UnifiedDiff, MissingTrailingNewline) {
    EXPECT_EQ(unified_diff("a\nb", "a\nc", "f.py"),
              "--- a/f.py\n+++ b/f.py\n@@ -1,2 +1,2 @@\n a\n-b\n\\ No newline at end of file\n+c\n\\ No newline at end of file\n");
}

TEST(UnifiedDiff, PureDeletion) {
    EXPECT_EQ(unified_diff("a\nb\nc\n", "a\nc\n", "f.py"), "--- a/f.py\n+++ b/f.py\n@@ -1,3 +1,2 @@\n a\n-b\n c\n");
}

}  // namespace
}  // namespace autosd
