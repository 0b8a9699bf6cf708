#include <gtest/gtest.h>

#include "autosd/report.hpp"
#include "autosd/session_io.hpp"
#include "test_support.hpp"

namespace autosd {
namespace {

TEST(Report, MarkdownGolden) {
    auto text = render_report(testing::sample_session(), ReportFormat::Markdown);
    std::string expected;
    EXPECT_TRUE(testing::matches_golden("sample_report.md", text, &expected)) << text;
}

TEST(Report, HtmlGolden) {
    auto text = render_report(testing::sample_session(), ReportFormat::Html);
    std::string expected;
    EXPECT_TRUE(testing::matches_golden("sample_report.html", text, &expected)) << text;
}

TEST(Report, VerdictColors) {
    EXPECT_EQ(verdict_color(Verdict::Supported), "green");
    EXPECT_EQ(verdict_color(Verdict::Rejected), "red");
    EXPECT_EQ(verdict_color(Verdict::Undecided), "yellow");
    auto html = render_report(testing::sample_session(), ReportFormat::Html);
    EXPECT_NE(html.find("data-verdict=\"Rejected\""), std::string::npos);
    EXPECT_NE(html.find("background:#cf222e"), std::string::npos);
    EXPECT_NE(html.find("&lt;below&gt; the maximum &amp; never"), std::string::npos);
    EXPECT_EQ(html.find("<below>"), std::string::npos);
}

TEST(Report, MarkdownStructure) {
    auto md = render_report(testing::sample_session(), ReportFormat::Markdown);
    EXPECT_NE(md.find("<summary>🟥 <b>Step 1 (Rejected, red)</b>: The list has the wrong length.</summary>"),
              std::string::npos);
    EXPECT_NE(md.find("stop at mathutil.py:9 ; run ; print len(result)"), std::string::npos);
    EXPECT_NE(md.find("As written:"), std::string::npos);
    EXPECT_NE(md.find("```diff\n--- a/mathutil.py"), std::string::npos);
    EXPECT_NE(md.find("Confidence: the debugging process ended with `<DEBUGGING DONE>`."), std::string::npos);
}

TEST(Report, AblatedAndPatchless) {
    auto s = testing::sample_session();
    s.config.ablate_debugger = true;
    s.steps[0].observation = Observation{observed::Hallucinated{"4"}, false};
    s.patch.reset();
    auto md = render_report(s, ReportFormat::Markdown);
    EXPECT_NE(md.find("**Observation** (not executed)"), std::string::npos);
    EXPECT_NE(md.find("No patch was produced."), std::string::npos);
    EXPECT_NE(md.find("Debugger ablated"), std::string::npos);
}

TEST(Report, BackticksInsideFieldsGetLongerFence) {
    auto s = testing::sample_session();
    s.steps[0].conclusion = "see ```code``` here";
    auto md = render_report(s, ReportFormat::Markdown);
    EXPECT_NE(md.find("````text\nsee ```code``` here\n````"), std::string::npos);
}

TEST(Report, PersistedSessionRendersIdentically) {
    auto s = testing::sample_session();
    auto back = deserialize_session(serialize_session(s));
    for (auto f : {ReportFormat::Markdown, ReportFormat::Html}) EXPECT_EQ(render_report(back, f), render_report(s, f));
}

TEST(Report, FormatNames) {
    EXPECT_EQ(parse_report_format("markdown"), ReportFormat::Markdown);
    EXPECT_EQ(parse_report_format("HTML"), ReportFormat::Html);
    EXPECT_THROW(parse_report_format("pdf"), std::invalid_argument);
}

}  // namespace
}  // namespace autosd
