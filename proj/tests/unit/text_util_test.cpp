#include <gtest/gtest.h>

#include "autosd/text_util.hpp"

namespace autosd {
namespace {

TEST(TextUtil, SplitAndJoinLines) {
    EXPECT_EQ(split_lines("a\nb\n"), (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(split_lines("a\n\nb"), (std::vector<std::string>{"a", "", "b"}));
    EXPECT_TRUE(split_lines("").empty());
    EXPECT_EQ(join_lines({"a", "b"}), "a\nb\n");
}

TEST(TextUtil, CaseInsensitiveSearch) {
    EXPECT_EQ(find_ci("The hypothesis is REJECTED", "rejected"), 18u);
    EXPECT_EQ(find_ci("abc", "x"), std::string::npos);
    EXPECT_TRUE(starts_with_ci("Hypothesis: x", "hypothesis"));
}

TEST(TextUtil, TruncateUtf8CountsCodePoints) {
    EXPECT_EQ(truncate_utf8("héllo", 10), "héllo");
    EXPECT_EQ(truncate_utf8("héllo", 3), "hél…");
}

TEST(TextUtil, CapBytesKeepsCodePointsWhole) {
    std::string s = "aé";  // 3 bytes
    EXPECT_EQ(cap_bytes(s, 2, "!"), "a!");
    EXPECT_EQ(cap_bytes(s, 3, "!"), s);
}

TEST(TextUtil, Base64RoundTrip) {
    for (std::string s : {"", "a", "ab", "abc", "print(x[0]) ; \xff\x01"}) EXPECT_EQ(base64_decode(base64_encode(s)), s);
    EXPECT_EQ(base64_encode("len(result)"), "bGVuKHJlc3VsdCk=");
}

TEST(TextUtil, FingerprintIsStable) {
    EXPECT_EQ(fingerprint(""), "cbf29ce484222325");
    EXPECT_EQ(fingerprint("a"), "af63dc4c8601ec8c");
    EXPECT_NE(fingerprint("a"), fingerprint("b"));
}

}  // namespace
}  // namespace autosd
