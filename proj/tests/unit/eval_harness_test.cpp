#include <gtest/gtest.h>

#include <json.hpp>

#include "autosd/eval_harness.hpp"
#include "test_support.hpp"

namespace autosd {
namespace {

using namespace std::chrono_literals;

PatchCandidate candidate(const std::string& source) {
    PatchCandidate p;
    p.replacement_method_source = source;
    return p;
}

TEST(EvaluatePatch, PlausibleWhenSuitePasses) {
    auto bug = testing::demo_bug();
    LocalTestAdapter local;
    auto patch = candidate(testing::demo_fix().substr(1, testing::demo_fix().size() - 5));
    EXPECT_EQ(evaluate_patch(bug, patch, local, 20s), PatchEvaluation::Plausible);
    EXPECT_TRUE(patch.needs_manual_review);
    EXPECT_EQ(patch.evaluation_note, "all tests pass");
    EXPECT_FALSE(patch.applied_diff.empty());
}

TEST(EvaluatePatch, GroundTruthIsPlausible) {
    auto bug = testing::demo_bug();
    LocalTestAdapter local;
    std::string fixed = bug.method_source;
    fixed.replace(fixed.find("n < current"), 11, "n > current");
    auto patch = candidate(fixed);
    EXPECT_EQ(evaluate_patch(bug, patch, local, 20s), PatchEvaluation::Plausible);
}

TEST(EvaluatePatch, FailingSuiteIsImplausible) {
    auto bug = testing::demo_bug();
    LocalTestAdapter local;
    auto patch = candidate("def running_max(values):\n    return []\n");
    EXPECT_EQ(evaluate_patch(bug, patch, local, 20s), PatchEvaluation::Implausible);
    EXPECT_FALSE(patch.needs_manual_review);
    EXPECT_EQ(patch.evaluation_note.find("`python3 -B -S test_mathutil.py test_running_max` AssertionError"), 0u);
}

TEST(EvaluatePatch, NoOpSyntaxErrorAndTimeout) {
    auto bug = testing::demo_bug();
    LocalTestAdapter local;
    auto noop = candidate(bug.method_source);
    EXPECT_EQ(evaluate_patch(bug, noop, local, 20s), PatchEvaluation::Implausible);
    auto broken = candidate("def running_max(values:\n    pass\n");
    EXPECT_EQ(evaluate_patch(bug, broken, local, 20s), PatchEvaluation::Implausible);
    EXPECT_NE(broken.evaluation_note.find("does not parse"), std::string::npos);
    auto loop = candidate("def running_max(values):\n    while True:\n        pass\n");
    EXPECT_EQ(evaluate_patch(bug, loop, local, 1s), PatchEvaluation::Implausible);
    EXPECT_EQ(loop.evaluation_note.find("timed out after 1s"), 0u);
}

TEST(MeanStd, SampleStandardDeviation) {
    auto m = mean_stddev({2, 4, 4, 4, 5, 5, 7, 9});
    EXPECT_DOUBLE_EQ(m.mean, 5.0);
    EXPECT_NEAR(m.stddev, 2.138089935, 1e-9);
    EXPECT_EQ(format_mean_std(m), "5.00 ± 2.14");
    EXPECT_EQ(mean_stddev({3}).stddev, 0.0);
    EXPECT_EQ(mean_stddev({}).n, 0u);
}

RepairSession outcome(const std::string& bug, int attempt, bool confident, std::optional<PatchEvaluation> eval,
                      bool ablated = false) {
    RepairSession s;
    s.bug.id = bug;
    s.attempt = attempt;
    s.config.ablate_debugger = ablated;
    s.confident = confident;
    if (eval) {
        PatchCandidate p;
        p.evaluation = *eval;
        s.patch = p;
    }
    return s;
}

TEST(Aggregate, PartitionsByConfidence) {
    std::vector<RepairSession> sessions;
    for (int i = 0; i < 4; ++i) sessions.push_back(outcome("b1", i, true, PatchEvaluation::Plausible));
    sessions.push_back(outcome("b1", 4, true, PatchEvaluation::Implausible));
    sessions.push_back(outcome("b2", 0, false, PatchEvaluation::Plausible));
    sessions.push_back(outcome("b2", 1, false, std::nullopt));
    sessions.push_back(outcome("b3", 0, false, PatchEvaluation::Implausible));
    auto r = aggregate(sessions, 5);
    EXPECT_EQ(r.benchmark_size, 5);
    EXPECT_EQ(r.grounded.bugs_fixed, 2);
    EXPECT_EQ(r.grounded.total.attempts, 8);
    EXPECT_EQ(r.grounded.total.plausible, 5);
    EXPECT_DOUBLE_EQ(*r.grounded.confident.precision(), 0.8);
    EXPECT_NEAR(*r.grounded.not_confident.precision(), 1.0 / 3.0, 1e-12);
    ASSERT_EQ(r.grounded.bugs.size(), 3u);
    EXPECT_EQ(r.grounded.bugs[1].no_patch, 1);
    EXPECT_FALSE(r.ablated);
}

TEST(Aggregate, SeparatesAblatedSessions) {
    std::vector<RepairSession> sessions = {outcome("b1", 0, true, PatchEvaluation::Plausible),
                                           outcome("b1", 0, false, PatchEvaluation::Implausible, true)};
    auto r = aggregate(sessions);
    EXPECT_EQ(r.benchmark_size, 1);
    ASSERT_TRUE(r.ablated);
    EXPECT_EQ(r.ablated->total.attempts, 1);
    EXPECT_EQ(r.grounded.total.attempts, 1);
    EXPECT_FALSE(r.grounded.not_confident.precision());
}

TEST(Aggregate, JsonAndTable) {
    std::vector<RepairSession> sessions = {outcome("b1", 0, true, PatchEvaluation::Plausible),
                                           outcome("b1", 1, false, PatchEvaluation::Implausible)};
    auto r = aggregate(sessions);
    auto j = nlohmann::json::parse(aggregate_to_json(r));
    EXPECT_EQ(j["format"], "autosd-results/1");
    EXPECT_EQ(j["grounded"]["confident"]["precision"], 1.0);
    EXPECT_EQ(j["grounded"]["not_confident"]["precision"], 0.0);
    EXPECT_TRUE(j["ablated"].is_null());
    auto table = render_aggregate_table(r);
    EXPECT_NE(table.find("confident (done):       1 / 1 (precision 1.000)"), std::string::npos) << table;
}

}  // namespace
}  // namespace autosd
