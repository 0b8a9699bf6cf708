#include <gtest/gtest.h>

#include "autosd/prompting.hpp"
#include "test_support.hpp"

namespace autosd {
namespace {

TraceStep make_step(int index, Verdict verdict, std::string hypothesis, Observation obs, std::string conclusion) {
    TraceStep s;
    s.index = index;
    s.hypothesis = std::move(hypothesis);
    s.prediction = "p" + std::to_string(index);
    s.experiment_raw = "stop at mathutil.py:8 ; run ; print current";
    s.experiment = parse_experiment(s.experiment_raw);
    s.observation = std::move(obs);
    s.conclusion = std::move(conclusion);
    s.verdict = verdict;
    return s;
}

BugContext golden_bug() {
    auto bug = testing::demo_bug();
    bug.project_root = "/fixtures/demo_bug/project";
    return bug;
}

TEST(Prompting, InitialPromptGolden) {
    auto text = build_initial_prompt(golden_bug()).render();
    std::string expected;
    EXPECT_TRUE(testing::matches_golden("demo_initial.prompt", text, &expected)) << text;
}

TEST(Prompting, InitialPromptSectionsInOrder) {
    auto bug = golden_bug();
    bug.bug_report = "running_max returns the minimum.\n";
    auto text = build_initial_prompt(bug).render();
    auto method = text.find("## Buggy method");
    auto test = text.find("## Failing test");
    auto error = text.find("## Error message");
    auto report = text.find("## Bug report");
    ASSERT_NE(report, std::string::npos);
    EXPECT_LT(text.find("scientific method"), method);
    EXPECT_LT(method, test);
    EXPECT_LT(test, error);
    EXPECT_LT(error, report);
    EXPECT_NE(text.find("\n6         if current is None or n < current:\n"), std::string::npos);
    EXPECT_TRUE(text.size() >= 12 && text.substr(text.size() - 12) == "\nHypothesis:");
}

TEST(Prompting, NoBugReportSectionWhenAbsent) {
    auto text = build_initial_prompt(golden_bug()).render();
    EXPECT_EQ(text.find("## Bug report"), std::string::npos);
}

TEST(Prompting, DescriptionUsesLanguageDebugger) {
    auto desc = load_sd_description(LanguageId::Python);
    EXPECT_EQ(desc.find("{debugger}"), std::string::npos);
    EXPECT_NE(desc.find("pdb"), std::string::npos);
    EXPECT_NE(desc.find("<DEBUGGING DONE>"), std::string::npos);
}

TEST(Prompting, ErrorMessageIsCapped) {
    auto bug = golden_bug();
    bug.error_message = std::string(5000, 'e');
    auto block = render_bug_block(bug, PromptOptions{100, 1 << 20});
    EXPECT_NE(block.find(std::string(100, 'e') + "\n[... truncated]"), std::string::npos);
    EXPECT_EQ(block.find(std::string(101, 'e')), std::string::npos);
}

TEST(Prompting, ByteCapRaises) {
    auto bug = golden_bug();
    auto doc = build_initial_prompt(bug, PromptOptions{4096, 100});
    EXPECT_THROW(doc.render(), PromptTooLarge);
}

TEST(Prompting, StepRendering) {
    auto s = make_step(1, Verdict::Supported, "h", Observation{observed::NoException{}, true}, "Supported.");
    EXPECT_EQ(render_step(s),
              "Hypothesis: h\nPrediction: p1\nExperiment: `stop at mathutil.py:8 ; run ; print current`\n"
              "Observation: [No exception triggered]\nConclusion: Supported.");
}

TEST(Prompting, UndecidedConclusionIsMarked) {
    auto s = make_step(1, Verdict::Undecided, "h", Observation{observed::ExperimentError{"x"}, true}, "Unclear.");
    EXPECT_NE(render_step(s).find("Conclusion: Unclear. (undecided due to experiment error)"), std::string::npos);
    s.conclusion = "The hypothesis is undecided due to experiment error.";
    EXPECT_NE(render_step(s).find("Conclusion: The hypothesis is undecided due to experiment error."),
              std::string::npos);
    EXPECT_EQ(render_step(s).find("(undecided"), std::string::npos);
}

TEST(Prompting, AppendKeepsOrderAndCue) {
    auto doc = build_initial_prompt(golden_bug());
    auto a = make_step(1, Verdict::Rejected, "first", Observation{observed::SingleValue{"4"}, true}, "Rejected.");
    auto b = make_step(2, Verdict::Supported, "second", Observation{observed::SingleValue{"5"}, true}, "Supported.");
    auto text = append_step(append_step(doc, a), b).render();
    EXPECT_LT(text.find("Hypothesis: first"), text.find("Hypothesis: second"));
    EXPECT_TRUE(std::string_view(text).ends_with("Conclusion: Supported.\n\nHypothesis:"));
}

TEST(Prompting, PartialCues) {
    auto doc = build_initial_prompt(golden_bug());
    auto s = make_step(1, Verdict::Undecided, "h", Observation{observed::SingleValue{"4"}, true}, "");
    auto obs = render_partial(doc, s, PartialCue::Observation);
    auto concl = render_partial(doc, s, PartialCue::Conclusion);
    EXPECT_EQ(obs.substr(obs.size() - 13), "\nObservation:");
    EXPECT_TRUE(std::string_view(concl).ends_with("\nObservation: 4\nConclusion:")) << concl.substr(concl.size() - 40);
    EXPECT_EQ(obs.substr(0, doc.render().size() - 11), doc.render().substr(0, doc.render().size() - 11));
}

TEST(Prompting, FixPromptDropsRejectedBlocks) {
    auto doc = build_initial_prompt(golden_bug());
    auto a = make_step(1, Verdict::Rejected, "wrong idea", Observation{observed::SingleValue{"4"}, true}, "Rejected.");
    auto b = make_step(2, Verdict::Supported, "right idea", Observation{observed::SingleValue{"1"}, true}, "Yes.");
    auto c = make_step(3, Verdict::Undecided, "unclear", Observation{observed::ExperimentError{"e"}, true}, "");
    auto full = append_step(append_step(append_step(doc, a), b), c);
    auto fix = build_fix_prompt(full, {a, b, c});
    EXPECT_EQ(fix.mode, PromptMode::FixGeneration);
    ASSERT_EQ(fix.step_blocks.size(), 2u);
    for (const auto& block : fix.step_blocks) EXPECT_NE(block.verdict, Verdict::Rejected);
    auto text = fix.render();
    EXPECT_EQ(text.find("wrong idea"), std::string::npos);
    EXPECT_NE(full.render().find(fix.step_blocks[0].text), std::string::npos);
    EXPECT_TRUE(text.size() > kFixSuffix.size() && text.substr(text.size() - kFixSuffix.size()) == kFixSuffix);
    std::string expected;
    EXPECT_TRUE(testing::matches_golden("demo_fix.prompt", text, &expected)) << text;
}

TEST(Prompting, FixPromptWithoutSteps) {
    auto doc = build_initial_prompt(golden_bug());
    auto text = build_fix_prompt(doc, {}).render();
    auto initial = doc.render();
    EXPECT_EQ(text, initial.substr(0, initial.size() - 11) + std::string(kFixSuffix));
}

TEST(Prompting, RenderingIsDeterministic) {
    EXPECT_EQ(build_initial_prompt(golden_bug()).render(), build_initial_prompt(golden_bug()).render());
}

TEST(Prompting, HypothesisSummary) {
    EXPECT_EQ(hypothesis_summary("  The loop is off by one. Because x.\n"), "The loop is off by one.");
    EXPECT_EQ(hypothesis_summary("Value is 3.5 here"), "Value is 3.5 here");
    EXPECT_EQ(hypothesis_summary("first line\nsecond"), "first line");
    EXPECT_EQ(hypothesis_summary(std::string(200, 'x')), std::string(120, 'x') + "…");
}

}  // namespace
}  // namespace autosd
