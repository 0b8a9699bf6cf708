// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "autosd/benchgen.hpp"
#include "autosd/cli.hpp"
#include "autosd/eval_harness.hpp"
#include "autosd/experiment_dsl.hpp"
#include "autosd/orchestrator.hpp"
#include "autosd/session_io.hpp"
#include "autosd/text_util.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace autosd;
using autosd::testing::TempDir;
using Clock = std::chrono::steady_clock;

namespace {

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
    if (!ok) throw Failure(what);
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string demo(const std::string& name) { return (autosd::testing::fixture_dir() / "demo_bug" / name).string(); }

int cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path().string());
    return files;
}

std::vector<RepairSession> load_sessions(const fs::path& out) {
    std::vector<RepairSession> sessions;
    for (const auto& [rel, text] : tree(out))
        if (fs::path(rel).extension() == ".session") sessions.push_back(deserialize_session(text));
    return sessions;
}

// ---- criteria --------------------------------------------------------------

std::string determinism() {
    auto start = Clock::now();
    TempDir a, b;
    for (const auto* dir : {&a, &b}) {
        check(cli({"repair", "--bug-config", demo("bug.json"), "--backend", "replay", "--replay-script",
                   demo("three_step.replay"), "--probe-fixture", demo("probes.json"), "--n", "3", "--out",
                   dir->path().string(), "--quiet"}) == 0,
              "repair exited nonzero");
    }
    auto ta = tree(a.path()), tb = tree(b.path());
    int sessions = 0, reports = 0;
    for (const auto& [rel, _] : ta) {
        auto ext = fs::path(rel).extension();
        sessions += ext == ".session";
        reports += ext == ".md" || ext == ".html";
    }
    check(sessions == 3 && reports == 6, "expected 3 sessions and 6 reports");
    check(ta == tb, "output trees differ between runs");
    double t = seconds_since(start);
    check(t < 30, "took " + std::to_string(t) + "s");
    return std::to_string(ta.size()) + " files identical, " + std::to_string(t) + "s";
}

std::string three_step_replay() {
    auto bug = autosd::testing::demo_bug();
    auto backend = ReplayBackend::load(demo("three_step.replay"));
    LocalTestAdapter fallback;
    ScriptedProbeAdapter probes(ScriptedProbeAdapter::load_table(demo("probes.json")), fallback);
    LocalTestAdapter adapter(&probes);
    SessionConfig config;
    config.patch_budget = 1;
    auto run = run_repair(bug, config, *backend, adapter);
    check(run.sessions.size() == 1, "no session");
    const auto& s = run.sessions.front();
    std::vector<Verdict> verdicts;
    for (const auto& step : s.steps) verdicts.push_back(step.verdict);
    check(verdicts == std::vector<Verdict>{Verdict::Rejected, Verdict::Supported, Verdict::Supported},
          "verdicts do not match");
    check(s.confident, "not confident");
    check(s.termination_reason == TerminationReason::DoneToken, "termination is not DoneToken");
    check(s.patch && !s.patch->applied_diff.empty(), "empty diff");
    return "3 steps, diff of " + std::to_string(s.patch->applied_diff.size()) + " bytes";
}

std::string observation_goldens() {
    using namespace std::chrono_literals;
    ProbeResult next;
    TestResult next_run;
    FakeAdapter fake([&](auto&&...) { return next; }, [&](auto&&...) { return next_run; });
    BugContext bug;
    bug.failing_test_command = "t";
    const DebuggerProbe probe{{"f.py", 10}, "x"};
    auto probed = [&](ProbeResult r) {
        next = std::move(r);
        return execute_probe(fake, bug, "/nonexistent", probe, 30s).rendered();
    };
    auto ran = [&](TestResult r) {
        next_run = std::move(r);
        return execute_run(fake, "/nonexistent", "t", 30s).rendered();
    };

    ProbeResult loop150;
    loop150.hit_count = 150;
    for (int i = 0; i < 150; ++i) loop150.values.push_back(std::to_string(i));
    std::string capped = "At each loop execution, the expression was: [0";
    for (int i = 1; i < 100; ++i) capped += ", " + std::to_string(i);
    capped += "]";
    ProbeResult timeout;
    timeout.test.status = TestStatus::Timeout;

    const std::vector<std::pair<std::string, std::string>> cases = {
        {probed({1, {"3"}, std::nullopt, {}}), "3"},
        {probed({4, {"1", "1", "1", "1"}, std::nullopt, {}}), "At each loop execution, the expression was: [1, 1, 1, 1]"},
        {probed(loop150), capped},
        {ran({TestStatus::Pass, "", ""}), "[No exception triggered]"},
        {ran({TestStatus::Error, "ValueError", "bad input"}), "ValueError: bad input"},
        {probed({0, {}, std::nullopt, {}}), "[Breakpoint at f.py:10 was not hit]"},
        {probed({1, {}, std::string("NameError: name 'q' is not defined"), {}}),
         "[Experiment error: NameError: name 'q' is not defined]"},
        {probed(timeout), "[Experiment timed out after 30s]"},
        {ran({TestStatus::Timeout, "", ""}), "[Experiment timed out after 30s]"},
    };
    for (const auto& [got, want] : cases) check(got == want, "got `" + got + "`, want `" + want + "`");
    check(fake.probe_calls() == 6 && fake.run_calls() == 3, "unexpected adapter traffic");
    return std::to_string(cases.size()) + " strings exact";
}

std::string dsl() {
    auto start = Clock::now();
    auto parsed = parse_experiment(R"(REPLACE(4321, "c>b", "c>b && a <= d") AND ADD(4323, "a+=1;") AND RUN)");
    const auto* script = std::get_if<EditScript>(&parsed);
    check(script, "appendix example is not an edit script");
    check(script->run_test, "RUN missing");
    check(script->edits.size() == 2, "expected two edits");
    const auto& r = script->edits[0];
    const auto& a = script->edits[1];
    check(r.kind == EditKind::Replace && r.line == 4321 && r.old_expr == "c>b" && r.new_expr == "c>b && a <= d",
          "REPLACE node differs");
    check(a.kind == EditKind::Add && a.line == 4323 && a.new_expr == "a+=1;" && a.old_expr.empty(), "ADD node differs");

    std::mt19937_64 rng(1000);
    for (int i = 0; i < 1000; ++i) {
        auto ast = autosd::testing::random_script(rng);
        auto text = render_experiment(ast);
        check(parse_experiment(text) == ast, "round trip failed for: " + text);
    }
    double t = seconds_since(start);
    check(t < 10, "took " + std::to_string(t) + "s");
    return "1000/1000 round trips, " + std::to_string(t) + "s";
}

std::string pruning() {
    auto bug = autosd::testing::demo_bug();
    auto adapter = autosd::testing::marker_adapter("n > current");
    std::mt19937_64 rng(50);
    const char* verdict_words[] = {"rejected", "supported", "undecided"};
    int rejected_steps = 0, kept_steps = 0, fix_prompts = 0, rejected_in_loop = 0;
    for (int attempt = 0; attempt < 50; ++attempt) {
        const int steps = 1 + int(rng() % 5);
        std::vector<int> verdicts;
        autosd::testing::AttemptScript script;
        for (int i = 0; i < steps; ++i) {
            int v = int(rng() % 3);
            verdicts.push_back(v);
            std::string tag = std::string(v == 0 ? "REJ" : "KEEP") + "-" + std::to_string(attempt) + "-" +
                              std::to_string(i);
            script.hypotheses.push_back(autosd::testing::hypothesis_text(
                "Marker " + tag + " explains it.", "stop at mathutil.py:8 ; run ; print current"));
            std::string conclusion = std::string(" The hypothesis is ") + verdict_words[v] + ".";
            if (i == steps - 1 && rng() % 2) conclusion += " <DEBUGGING DONE>";
            script.conclusions.push_back(conclusion + "\n");
            (v == 0 ? rejected_steps : kept_steps) += 1;
        }
        script.fix = autosd::testing::demo_fix(rng() % 2);
        autosd::testing::ScriptedModel model([&](int) { return script; });
        SessionConfig config;
        config.max_steps = steps;
        auto session = run_session(bug, config, model, adapter, attempt);
        check(int(session.steps.size()) == steps, "session stopped early");
        for (std::size_t i = 0; i < session.steps.size(); ++i)
            check(session.steps[i].verdict == Verdict(verdicts[i] == 0   ? Verdict::Rejected
                                                      : verdicts[i] == 1 ? Verdict::Supported
                                                                         : Verdict::Undecided),
                  "verdict not parsed as scripted");
        auto prompts = model.fix_prompts();
        check(prompts.size() == 1, "expected one fix prompt");
        ++fix_prompts;
        for (int i = 0; i < steps; ++i) {
            std::string tag = std::string(verdicts[std::size_t(i)] == 0 ? "REJ" : "KEEP") + "-" +
                              std::to_string(attempt) + "-" + std::to_string(i);
            bool present = prompts[0].find("Marker " + tag + " ") != std::string::npos;
            if (verdicts[std::size_t(i)] == 0) {
                check(!present, "fix prompt of attempt " + std::to_string(attempt) + " contains " + tag);
                ++rejected_in_loop;
            } else {
                check(present, "fix prompt of attempt " + std::to_string(attempt) + " lost " + tag);
            }
        }
    }
    check(rejected_steps > 0, "corpus has no rejected steps");
    return std::to_string(fix_prompts) + " fix prompts, 0 of " + std::to_string(rejected_steps) +
           " rejected blocks kept, " + std::to_string(kept_steps) + " other blocks kept";
}

std::vector<CorpusEntry> corpus() { return load_corpus(autosd::testing::fixture_dir() / "corpus"); }

std::vector<BenchmarkEntry> seed42(LocalTestAdapter& local) {
    // Uncapped, so that every mutator reaches the benchmark.
    BenchgenOptions options;
    options.max_per_function = 0;
    options.timeout = std::chrono::seconds(2);
    return generate_benchmark(corpus(), 42, 200, local, options);
}

std::string benchgen_oracle() {
    auto start = Clock::now();
    LocalTestAdapter local;
    auto entries = seed42(local);
    check(!entries.empty(), "no entries");
    auto functions = corpus();
    int reversible = 0;
    for (const auto& e : entries) {
        auto fn = std::find_if(functions.begin(), functions.end(), [&](const auto& c) { return c.id == e.corpus_id; });
        check(fn != functions.end(), "unknown corpus id " + e.corpus_id);
        auto results = run_suite(*fn, e.mutated_source, local, std::chrono::seconds(2));
        int failing = 0;
        for (const auto& [test, r] : results) failing += !r.passed();
        check(failing == 1, e.id + " has " + std::to_string(failing) + " failing tests");
        bool rule = classify_reversible(e.spec, e.original_source, e.mutated_source);
        bool oracle = oracle_reversible(e.original_source, e.mutated_source, std::nullopt);
        check(rule == oracle && rule == e.reversible, e.id + ": classifier and oracle disagree");
        reversible += oracle;
    }
    double t = seconds_since(start);
    check(t < 120, "took " + std::to_string(t) + "s");
    return std::to_string(entries.size()) + " entries (" + std::to_string(reversible) +
           " reversible), 100% agreement, " + std::to_string(t) + "s";
}

std::string baseline_asymmetry() {
    auto start = Clock::now();
    LocalTestAdapter local;
    auto entries = seed42(local);
    BaselineOptions options;
    options.reruns = 20;
    options.seed = 42;
    options.timeout = std::chrono::seconds(2);
    auto report = run_baseline(entries, options, local);
    check(report.reversible_entries > 0, "no reversible entries");
    for (auto kind : {MutatorKind::BinOpRemover, MutatorKind::IfRemover})
        check(std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.spec.mutator == kind; }),
              std::string("no ") + std::string(to_string(kind)) + " entries");
    check(report.ground_truth_fixed == report.entries, "ground truth does not fix every entry");
    check(report.reversible_fixed.mean < double(report.reversible_entries),
          "baseline reversible mean " + format_mean_std(report.reversible_fixed) + " is not below " +
              std::to_string(report.reversible_entries));
    for (auto kind : {MutatorKind::BinOpRemover, MutatorKind::IfRemover})
        for (const auto& run : report.runs) {
            auto it = run.exact_by_mutator.find(kind);
            check(it == run.exact_by_mutator.end() || it->second == 0,
                  std::string(to_string(kind)) + " fixed by exact restoration");
        }
    double t = seconds_since(start);
    check(t < 300, "took " + std::to_string(t) + "s");
    return "reversible " + format_mean_std(report.reversible_fixed) + " vs ground truth " +
           std::to_string(report.reversible_entries) + "; removal-class exact 0; coincidental " +
           format_mean_std(report.coincidental) + "; " + std::to_string(t) + "s";
}

std::string confidence_partition() {
    TempDir dir;
    auto hypothesis = autosd::testing::hypothesis_text("The comparison keeps the minimum.",
                                                       "stop at mathutil.py:8 ; run ; print current");
    for (int k = 0; k < 20; ++k) {
        const bool confident = k < 10;
        const bool plausible = confident ? k < 8 : k < 14;
        nlohmann::ordered_json doc;
        doc["format"] = "autosd-replay/1";
        doc["completions"] = nlohmann::ordered_json::array(
            {{{"text", hypothesis}},
             {{"text", confident ? " The hypothesis is supported. <DEBUGGING DONE>\n" : " The hypothesis is undecided.\n"}},
             {{"text", autosd::testing::demo_fix(plausible)}}});
        char name[32];
        std::snprintf(name, sizeof name, "attempt_%02d.replay", k);
        write_file((dir / name).string(), doc.dump(2));
    }
    auto backend = ReplayBackend::load(dir.path());
    auto adapter = autosd::testing::marker_adapter("n > current");
    SessionConfig config;
    config.max_steps = 1;
    config.patch_budget = 20;
    auto run = run_repair(autosd::testing::demo_bug(), config, *backend, adapter);
    check(run.sessions.size() == 20, "expected 20 sessions");
    auto report = aggregate(run.sessions);
    const auto& g = report.grounded;
    check(g.confident.attempts == 10 && g.not_confident.attempts == 10, "partition sizes are not 10/10");
    check(g.confident.precision() == 0.8, "confident precision is not 0.8");
    check(g.not_confident.precision() == 0.4, "non-confident precision is not 0.4");
    return "precision " + std::to_string(*g.confident.precision()) + " vs " +
           std::to_string(*g.not_confident.precision());
}

std::string ablation_audit() {
    TempDir out;
    check(cli({"repair", "--bug-config", demo("bug.json"), "--backend", "replay", "--replay-script",
               demo("ablated.replay"), "--probe-fixture", demo("probes.json"), "--ablate-debugger", "--n", "2",
               "--out", out.path().string(), "--quiet"}) == 0,
          "ablated repair exited nonzero");
    auto sessions = load_sessions(out.path());
    check(sessions.size() == 2, "expected two sessions");
    int evaluation_runs = 0;
    for (const auto& s : sessions) {
        check(s.config.ablate_debugger, "session not marked as ablated");
        for (const auto& step : s.steps) check(step.observation && !step.observation->grounded, "grounded observation");
        for (const auto& e : s.executions) {
            check(e.phase != ExecutionPhase::Loop, "adapter call during the loop: " + e.target);
            if (e.phase == ExecutionPhase::Evaluation && e.kind == ExecutionKind::RunTest) ++evaluation_runs;
        }
        check(s.patch && s.patch->evaluation != PatchEvaluation::Unevaluated, "patch not evaluated");
    }
    check(evaluation_runs > 0, "evaluation ran no tests");

    // Same check against raw adapter traffic.
    auto backend = ReplayBackend::load(demo("ablated.replay"));
    auto fake = autosd::testing::marker_adapter("n > current");
    SessionConfig config;
    config.ablate_debugger = true;
    config.patch_budget = 1;
    RepairOptions options;
    options.evaluate = false;
    auto run = run_repair(autosd::testing::demo_bug(), config, *backend, fake, options);
    check(run.sessions.size() == 1 && run.sessions[0].patch, "no patch");
    const auto& log = run.sessions[0].executions;
    check(log.size() == 1 && log[0].phase == ExecutionPhase::Precheck, "unexpected audit entries");
    check(fake.probe_calls() == 0 && fake.run_calls() == 1, "adapter traffic beyond the precheck");
    evaluate_patch(run.sessions[0].bug, *run.sessions[0].patch, fake, std::chrono::seconds(5));
    check(fake.run_calls() > 0, "evaluation ran no tests");
    return "0 loop calls, " + std::to_string(evaluation_runs) + " evaluation test runs";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
        {"e2e-determinism", determinism},
        {"three-step-structural-replay", three_step_replay},
        {"observation-goldens", observation_goldens},
        {"dsl-round-trip", dsl},
        {"fix-prompt-pruning", pruning},
        {"benchgen-oracle", benchgen_oracle},
        {"baseline-asymmetry", baseline_asymmetry},
        {"confidence-partition", confidence_partition},
        {"ablation-audit", ablation_audit},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        try {
            auto detail = fn();
            std::cout << "PASS " << name << ": " << detail << std::endl;
        } catch (const std::exception& e) {
            ++failed;
            std::cout << "FAIL " << name << ": " << e.what() << std::endl;
        }
    }
    return failed ? 1 : 0;
}
