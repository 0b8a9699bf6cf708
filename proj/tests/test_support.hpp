#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "autosd/bug_config.hpp"
#include "autosd/debug_driver.hpp"
#include "autosd/experiment_dsl.hpp"
#include "autosd/llm_backend.hpp"
#include "autosd/text_util.hpp"
#include "autosd/trace_model.hpp"

namespace autosd::testing {

inline std::filesystem::path fixture_dir() { return AUTOSD_FIXTURE_DIR; }
inline std::filesystem::path data_dir() { return AUTOSD_TEST_DATA_DIR; }
inline std::filesystem::path golden_dir() { return AUTOSD_GOLDEN_DIR; }

inline BugContext demo_bug() { return load_bug_config(fixture_dir() / "demo_bug" / "bug.json"); }

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "autosd-test-XXXXXX").string();
        if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Golden file comparison. With AUTOSD_UPDATE_GOLDEN=1 the golden is rewritten instead.
inline bool matches_golden(const std::string& name, const std::string& actual, std::string* expected_out = nullptr) {
    const auto file = golden_dir() / name;
    if (const char* update = std::getenv("AUTOSD_UPDATE_GOLDEN"); update && std::string(update) == "1") {
        write_file(file.string(), actual);
        return true;
    }
    std::string expected = std::filesystem::exists(file) ? read_file(file.string()) : std::string("<missing golden>");
    if (expected_out) *expected_out = expected;
    return expected == actual;
}

/// Model backend answering from a callback; records every request.
class CallbackBackend : public ModelBackend {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;
    explicit CallbackBackend(Fn fn, std::string name = "callback") : fn_(std::move(fn)), name_(std::move(name)) {}

    std::string complete(const CompletionRequest& request) override {
        {
            std::lock_guard lock(mu_);
            requests_.push_back(request);
        }
        return apply_stop_sequences(fn_(request), request.stop_sequences);
    }
    std::string identity() const override { return name_; }

    std::vector<CompletionRequest> requests() const {
        std::lock_guard lock(mu_);
        return requests_;
    }

private:
    Fn fn_;
    std::string name_;
    mutable std::mutex mu_;
    std::vector<CompletionRequest> requests_;
};

/// Adapter whose failing test fails until the buggy file contains `fixed_marker`.
inline FakeAdapter marker_adapter(std::string fixed_marker, std::string file = "mathutil.py") {
    return FakeAdapter(
        [](const std::filesystem::path&, const SourceLocation&, const std::string& expr, const std::string&) {
            ProbeResult r;
            r.hit_count = 1;
            r.values = {"<" + expr + ">"};
            r.test = {TestStatus::Fail, "AssertionError", "boom"};
            return r;
        },
        [fixed_marker, file](const std::filesystem::path& root, const std::string&) {
            std::string text = read_file((root / file).string());
            if (text.find(fixed_marker) != std::string::npos) return TestResult{TestStatus::Pass, "", ""};
            return TestResult{TestStatus::Fail, "AssertionError", "boom"};
        });
}

/// A hand-built three-step session on the demo bug; exercises every report feature.
inline RepairSession sample_session() {
    RepairSession s;
    s.bug = demo_bug();
    s.bug.project_root = "/fixtures/demo_bug/project";
    s.attempt = 2;
    s.backend = "replay:sample.replay";
    s.config.patch_budget = 10;
    s.config.random_seed = 7;

    TraceStep a;
    a.index = 1;
    a.hypothesis = "The list has the wrong length. Probably.";
    a.prediction = "`len(result)` differs from 4.";
    a.experiment_raw = "b mathutil.py:9 ;; c ;; p len(result)";
    a.experiment = parse_experiment(a.experiment_raw);
    a.observation = Observation{observed::SingleValue{"4"}, true};
    a.conclusion = "The hypothesis is rejected.";
    a.verdict = Verdict::Rejected;

    TraceStep b;
    b.index = 2;
    b.hypothesis = "`current` is stuck <below> the maximum & never rises.";
    b.prediction = "`current` stays 1.";
    b.experiment_raw = "REPLACE(6, \"n < current\", \"n <= current\")";
    b.experiment = parse_experiment(b.experiment_raw);
    b.observation = Observation{observed::ExperimentError{"edits were applied but RUN was not requested, so nothing ran"}, true};
    b.conclusion = "Nothing was learned.";
    b.verdict = Verdict::Undecided;

    TraceStep c;
    c.index = 3;
    c.hypothesis = "Flipping the comparison fixes it.";
    c.prediction = "The test passes.";
    c.experiment_raw = "REPLACE(6, \"n < current\", \"n > current\") AND RUN";
    c.experiment = parse_experiment(c.experiment_raw);
    c.observation = Observation{observed::NoException{}, true};
    c.conclusion = "The hypothesis is supported. <DEBUGGING DONE>";
    c.verdict = Verdict::Supported;
    c.done = true;

    s.steps = {a, b, c};
    PatchCandidate patch;
    patch.replacement_method_source =
        "def running_max(values):\n    result = []\n    current = None\n    for n in values:\n"
        "        if current is None or n > current:\n            current = n\n        result.append(current)\n"
        "    return result\n";
    patch.applied_diff =
        "--- a/mathutil.py\n+++ b/mathutil.py\n@@ -3,7 +3,7 @@\n     result = []\n     current = None\n"
        "     for n in values:\n-        if current is None or n < current:\n+        if current is None or n > current:\n"
        "             current = n\n         result.append(current)\n     return result\n";
    patch.evaluation = PatchEvaluation::Plausible;
    patch.needs_manual_review = true;
    patch.evaluation_note = "all tests pass";
    s.patch = patch;
    s.confident = true;
    s.termination_reason = TerminationReason::DoneToken;
    s.executions = {{ExecutionPhase::Loop, ExecutionKind::Probe, "mathutil.py:9 len(result)"},
                    {ExecutionPhase::Loop, ExecutionKind::RunTest, s.bug.failing_test_command},
                    {ExecutionPhase::Evaluation, ExecutionKind::RunTest, s.bug.failing_test_command}};
    return s;
}

/// Completions for one attempt, consumed in request order by kind.
struct AttemptScript {
    std::vector<std::string> hypotheses;     // answers to `Hypothesis:` cues
    std::vector<std::string> conclusions;    // answers to `Conclusion:` cues
    std::vector<std::string> observations;   // answers to `Observation:` cues (ablation)
    std::optional<std::string> fix;          // absent: the fix request is malformed
};

/// Model stand-in that dispatches on the stop sequences of each request.
class ScriptedModel : public ModelBackend {
public:
    explicit ScriptedModel(std::function<AttemptScript(int attempt)> script) : script_(std::move(script)) {}

    std::string complete(const CompletionRequest& r) override {
        std::lock_guard lock(mu_);
        prompts_.push_back({r.attempt, r.prompt});
        seeds_.push_back(r.seed.value_or(-1));
        auto [it, fresh] = state_.try_emplace(r.attempt);
        if (fresh) it->second.script = script_(r.attempt);
        auto& st = it->second;
        auto take = [](const std::vector<std::string>& v, std::size_t& i) -> std::string {
            if (i >= v.size()) throw BackendUnavailable("scripted model exhausted");
            return v[i++];
        };
        std::string out;
        if (r.stop_sequences.empty()) {
            fix_prompts_.push_back(r.prompt);
            if (!st.script.fix) return "not a code block";
            out = *st.script.fix;
        } else if (r.stop_sequences.front() == "Observation:") {
            out = take(st.script.hypotheses, st.h);
        } else if (r.stop_sequences.front() == "Hypothesis:") {
            out = take(st.script.conclusions, st.c);
        } else {
            out = take(st.script.observations, st.o);
        }
        return apply_stop_sequences(out, r.stop_sequences);
    }
    std::string identity() const override { return "scripted"; }

    std::vector<std::string> fix_prompts() const {
        std::lock_guard lock(mu_);
        return fix_prompts_;
    }
    std::vector<std::int64_t> seeds() const {
        std::lock_guard lock(mu_);
        return seeds_;
    }

private:
    struct State {
        AttemptScript script;
        std::size_t h = 0, c = 0, o = 0;
    };
    std::function<AttemptScript(int)> script_;
    mutable std::mutex mu_;
    std::map<int, State> state_;
    std::vector<std::pair<int, std::string>> prompts_;
    std::vector<std::string> fix_prompts_;
    std::vector<std::int64_t> seeds_;
};

inline std::string hypothesis_text(const std::string& hypothesis, const std::string& experiment) {
    return " " + hypothesis + "\nPrediction: something observable.\nExperiment: `" + experiment + "`\n";
}

/// The demo bug's method with the comparison fixed (or left alone when `fixed` is false).
inline std::string demo_fix(bool fixed = true) {
    return std::string("\ndef running_max(values):\n    result = []\n    current = None\n    for n in values:\n") +
           "        if current is None or n " + (fixed ? ">" : "<") + " current:\n            current = n\n" +
           "        result.append(current)\n    return result\n```\n";
}

// ---- random experiment scripts ---------------------------------------------

inline std::string random_text(std::mt19937_64& rng, bool allow_empty) {
    static const std::string alphabet =
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _+-*/<>=!&|()[]{}.,:;'\"\\\t#%^~`@$?";
    std::uniform_int_distribution<int> len(allow_empty ? 0 : 1, 24);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    int n = len(rng);
    for (int i = 0; i < n; ++i) s += alphabet[pick(rng)];
    return s;
}

inline std::string random_identifier(std::mt19937_64& rng) {
    static const std::vector<std::string> parts = {"src", "lib", "pkg", "util", "core", "a_b", "x1", "mod"};
    std::uniform_int_distribution<std::size_t> pick(0, parts.size() - 1);
    std::uniform_int_distribution<int> depth(1, 3);
    std::string path;
    int d = depth(rng);
    for (int i = 0; i < d; ++i) path += (i ? "/" : "") + parts[pick(rng)];
    return path + ".py";
}

/// Printable expression without ';' or newlines that does not start or end with whitespace.
inline std::string random_expression(std::mt19937_64& rng) {
    static const std::vector<std::string> atoms = {"x", "len(items)", "self.count", "a[i] + b[j]", "d['k']",
                                                   "f(1, 2)", "n > current", "s.strip().lower()", "x == \"q\"",
                                                   "[v for v in xs]", "obj.attr.sub", "not flag", "3.5e2"};
    std::uniform_int_distribution<std::size_t> pick(0, atoms.size() - 1);
    std::uniform_int_distribution<int> count(1, 3);
    std::string e;
    int n = count(rng);
    for (int i = 0; i < n; ++i) e += (i ? " and " : "") + atoms[pick(rng)];
    return e;
}

inline ExperimentScript random_script(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> line(1, 99999);
    if (coin(rng)) return DebuggerProbe{{random_identifier(rng), line(rng)}, random_expression(rng)};
    EditScript script;
    std::uniform_int_distribution<int> count(1, 4), kind(0, 2);
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        switch (kind(rng)) {
            case 0: script.edits.push_back(Edit::replace(line(rng), random_text(rng, false), random_text(rng, true))); break;
            case 1: script.edits.push_back(Edit::add(line(rng), random_text(rng, false))); break;
            default: script.edits.push_back(Edit::del(line(rng), random_text(rng, false))); break;
        }
    }
    script.run_test = coin(rng);
    return script;
}

}  // namespace autosd::testing
