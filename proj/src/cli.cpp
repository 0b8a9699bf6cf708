#include "autosd/cli.hpp"

#include <algorithm>
#include <memory>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>

#include "autosd/benchgen.hpp"
#include "autosd/bug_config.hpp"
#include "autosd/eval_harness.hpp"
#include "autosd/orchestrator.hpp"
#include "autosd/patch_executor.hpp"
#include "autosd/report.hpp"
#include "autosd/session_io.hpp"
#include "autosd/text_util.hpp"

namespace fs = std::filesystem;

namespace autosd {

namespace {

struct RepairArgs {
    std::string bug_config;
    int n = 10;
    int max_steps = 3;
    std::string backend = "http";
    std::string replay_script;
    bool ablate = false;
    std::int64_t seed = 0;
    std::string out = "autosd-out";
    int jobs = 0;
    std::string harness;
    std::string probe_fixture;
    int timeout = 30;
    bool quiet = false;
};

struct BenchgenArgs {
    std::string corpus;
    int size = 200;
    std::uint64_t seed = 0;
    std::string out;
    int max_per_function = 2;
    std::vector<std::string> disable;
    int jobs = 0;
    int timeout = 10;
};

struct BaselineArgs {
    std::string manifest;
    int reruns = 100;
    int attempts = 10;
    std::uint64_t seed = 0;
    std::string out;
    int timeout = 10;
};

struct EvaluateArgs {
    std::string manifest;
    std::string sessions;
    std::string out;
    int timeout = 30;
};

struct RenderArgs {
    std::string session;
    std::string format = "markdown";
    std::string out;
};

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    return words;
}

/// Fills a missing error message by running the failing test once.
void derive_error_message(BugContext& bug, ExecutionAdapter& adapter, std::chrono::seconds timeout) {
    if (!bug.error_message.empty()) return;
    auto snapshot = ProjectSnapshot::create(bug.project_root);
    auto obs = run_failing_test(adapter, snapshot, bug, timeout);
    if (std::holds_alternative<observed::NoException>(obs.detail))
        throw BugNotReproducible("failing test passes on the unmodified project: " + bug.failing_test_command);
    bug.error_message = obs.rendered();
}

int cmd_repair(const RepairArgs& a, std::ostream& out, std::ostream& err) {
    BugContext bug;
    try {
        bug = load_bug_config(a.bug_config);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (a.n < 1 || a.max_steps < 1) {
        err << "config error: --n and --max-steps must be at least 1\n";
        return kExitConfig;
    }

    std::unique_ptr<ModelBackend> backend;
    if (a.backend == "replay") {
        if (a.replay_script.empty() || !fs::exists(a.replay_script)) {
            err << "config error: --backend replay needs an existing --replay-script\n";
            return kExitConfig;
        }
        try {
            backend = ReplayBackend::load(a.replay_script);
        } catch (const std::exception& e) {
            err << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
    } else {
        try {
            backend = std::make_unique<HttpBackend>(HttpBackendConfig::from_env());
        } catch (const BackendUnavailable& e) {
            err << "backend unavailable: " << e.what() << "\n";
            return kExitBackendUnavailable;
        }
    }

    std::unique_ptr<ExecutionAdapter> harness;
    std::unique_ptr<LocalTestAdapter> local_fallback;
    if (!a.harness.empty()) {
        harness = std::make_unique<ProcessAdapter>(split_words(a.harness));
    } else if (!a.probe_fixture.empty()) {
        try {
            local_fallback = std::make_unique<LocalTestAdapter>();
            harness = std::make_unique<ScriptedProbeAdapter>(ScriptedProbeAdapter::load_table(a.probe_fixture),
                                                             *local_fallback);
        } catch (const std::exception& e) {
            err << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
    }
    LocalTestAdapter adapter(harness.get());

    SessionConfig config;
    config.max_steps = a.max_steps;
    config.patch_budget = a.n;
    config.ablate_debugger = a.ablate;
    config.random_seed = a.seed;
    config.per_experiment_timeout = std::chrono::seconds(a.timeout);

    RepairOptions options;
    options.jobs = a.jobs;
    options.out_dir = fs::path(a.out);
    std::mutex log_mu;
    if (!a.quiet)
        options.session.progress = [&](const ProgressEvent& e) {
            std::lock_guard lock(log_mu);
            err << "[attempt " << e.attempt << "]";
            if (e.step > 0) err << " step " << e.step;
            err << " " << e.kind;
            if (!e.detail.empty()) err << ": " << truncate_utf8(e.detail, 160);
            err << "\n";
        };

    RepairRun run;
    try {
        derive_error_message(bug, adapter, config.per_experiment_timeout);
        run = run_repair(bug, config, *backend, adapter, options);
    } catch (const BugNotReproducible& e) {
        err << "bug not reproducible: " << e.what() << "\n";
        return kExitNotReproducible;
    } catch (const ReplayMismatch& e) {
        err << "replay mismatch: " << e.what() << "\n";
        return kExitConfig;
    }

    for (const auto& s : run.sessions) {
        auto path = session_path(a.out, bug.id, s.attempt);
        auto md = path, html = path;
        write_file(md.replace_extension(".md").string(), render_report(s, ReportFormat::Markdown));
        write_file(html.replace_extension(".html").string(), render_report(s, ReportFormat::Html));
    }
    auto report = aggregate(run.sessions, 1);
    auto table = render_aggregate_table(report);
    write_file((fs::path(a.out) / "summary.txt").string(), table);
    write_file((fs::path(a.out) / "results.json").string(), aggregate_to_json(report));
    out << table;
    for (const auto& f : run.failures) err << "failed: " << f << "\n";

    const bool all_backend_down = std::all_of(run.sessions.begin(), run.sessions.end(), [](const RepairSession& s) {
        return s.termination_reason == TerminationReason::ModelFailure && s.steps.empty() && !s.patch;
    });
    if (a.backend == "http" && all_backend_down) return kExitBackendUnavailable;
    return kExitOk;
}

int cmd_benchgen(const BenchgenArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<CorpusEntry> corpus;
    BenchgenOptions options;
    try {
        corpus = load_corpus(a.corpus);
        for (const auto& d : a.disable) options.enabled.erase(parse_mutator_kind(d));
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    options.max_per_function = a.max_per_function;
    options.jobs = a.jobs;
    options.timeout = std::chrono::seconds(a.timeout);
    LocalTestAdapter adapter;
    std::vector<BenchmarkEntry> entries;
    try {
        entries = generate_benchmark(corpus, a.seed, a.size, adapter, options);
    } catch (const CorpusTestFailure& e) {
        err << "corpus test failure: " << e.what() << "\n";
        return kExitFailure;
    }
    write_benchmark(entries, a.seed, a.out);
    std::map<std::string, int> by_mutator;
    int reversible = 0;
    for (const auto& e : entries) {
        ++by_mutator[std::string(to_string(e.spec.mutator))];
        if (e.reversible) ++reversible;
    }
    out << "generated " << entries.size() << " bugs (" << reversible << " reversible) into " << a.out << "\n";
    for (const auto& [m, n] : by_mutator) out << "  " << m << ": " << n << "\n";
    return kExitOk;
}

int cmd_baseline(const BaselineArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<BenchmarkEntry> entries;
    try {
        entries = load_manifest(a.manifest);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    BaselineOptions options;
    options.reruns = a.reruns;
    options.attempts = a.attempts;
    options.seed = a.seed;
    options.timeout = std::chrono::seconds(a.timeout);
    LocalTestAdapter adapter;
    auto report = run_baseline(entries, options, adapter);
    out << render_baseline_table(report);
    if (!a.out.empty()) write_file(a.out, baseline_to_json(report, options));
    return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    std::optional<int> size;
    if (!a.manifest.empty()) {
        try {
            size = int(load_manifest(a.manifest).size());
        } catch (const std::exception& e) {
            err << "config error: " << e.what() << "\n";
            return kExitConfig;
        }
    }
    std::vector<fs::path> files;
    if (fs::is_directory(a.sessions))
        for (const auto& e : fs::recursive_directory_iterator(a.sessions))
            if (e.is_regular_file() && e.path().extension() == ".session") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    LocalTestAdapter adapter;
    std::vector<RepairSession> sessions;
    for (const auto& f : files) {
        RepairSession s;
        try {
            s = deserialize_session(read_file(f.string()));
        } catch (const SchemaError& e) {
            err << "invalid session " << f.string() << ": " << e.what() << "\n";
            return kExitConfig;
        }
        if (s.patch && s.patch->evaluation == PatchEvaluation::Unevaluated) {
            AuditingAdapter audited(adapter, s.executions);
            audited.set_phase(ExecutionPhase::Evaluation);
            evaluate_patch(s.bug, *s.patch, audited, std::chrono::seconds(a.timeout));
            write_file(f.string(), serialize_session(s));
        }
        sessions.push_back(std::move(s));
    }
    auto report = aggregate(sessions, size);
    out << render_aggregate_table(report);
    if (!a.out.empty()) write_file(a.out, aggregate_to_json(report));
    return kExitOk;
}

int cmd_render(const RenderArgs& a, std::ostream& out, std::ostream& err) {
    try {
        auto format = parse_report_format(a.format);
        auto session = deserialize_session(read_file(a.session));
        auto doc = render_report(session, format);
        if (a.out.empty()) out << doc;
        else write_file(a.out, doc);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Scientific-debugging program repair"};
    app.require_subcommand(1);

    RepairArgs repair;
    auto* r = app.add_subcommand("repair", "Run repair sessions for one bug");
    r->add_option("--bug-config", repair.bug_config, "Bug-config JSON file")->required();
    r->add_option("--n", repair.n, "Patch budget (independent sessions)");
    r->add_option("--max-steps", repair.max_steps, "Maximum debugging steps per session");
    r->add_option("--backend", repair.backend, "Model backend")->check(CLI::IsMember({"http", "replay"}));
    r->add_option("--replay-script", repair.replay_script, "Replay file or directory of .replay files");
    r->add_flag("--ablate-debugger", repair.ablate, "Let the model invent observations");
    r->add_option("--seed", repair.seed, "Base sampling seed");
    r->add_option("--out", repair.out, "Output directory");
    r->add_option("--jobs", repair.jobs, "Parallel sessions (0: CPU count)");
    r->add_option("--harness", repair.harness, "Debugger harness command for probes");
    r->add_option("--probe-fixture", repair.probe_fixture, "Answer probes from a fixture table");
    r->add_option("--timeout", repair.timeout, "Per-experiment timeout in seconds");
    r->add_flag("--quiet", repair.quiet, "No progress output");

    BenchgenArgs bench;
    auto* b = app.add_subcommand("benchgen", "Generate an almost-right bug benchmark from a corpus");
    b->add_option("--corpus", bench.corpus, "Corpus directory with corpus.json")->required();
    b->add_option("--size", bench.size, "Target number of bugs");
    b->add_option("--seed", bench.seed, "Shuffle seed");
    b->add_option("--out", bench.out, "Output directory")->required();
    b->add_option("--max-per-function", bench.max_per_function, "Bugs per corpus function (0: no cap)");
    b->add_option("--disable", bench.disable, "Mutator to leave out (repeatable)");
    b->add_option("--jobs", bench.jobs, "Parallel test runs (0: CPU count)");
    b->add_option("--timeout", bench.timeout, "Per-test timeout in seconds");

    BaselineArgs base;
    auto* bl = app.add_subcommand("baseline", "Run the reverse-template baseline over a benchmark");
    bl->add_option("--manifest", base.manifest, "Benchmark manifest")->required();
    bl->add_option("--reruns", base.reruns, "Number of seeded reruns");
    bl->add_option("--attempts", base.attempts, "Candidate applications per bug");
    bl->add_option("--seed", base.seed, "Base seed");
    bl->add_option("--out", base.out, "Write results JSON here");
    bl->add_option("--timeout", base.timeout, "Per-test timeout in seconds");

    EvaluateArgs eval;
    auto* ev = app.add_subcommand("evaluate", "Evaluate and aggregate persisted sessions");
    ev->add_option("--manifest", eval.manifest, "Benchmark manifest (sets the benchmark size)");
    ev->add_option("--sessions", eval.sessions, "Directory searched for .session files")->required();
    ev->add_option("--out", eval.out, "Write results JSON here");
    ev->add_option("--timeout", eval.timeout, "Per-test timeout in seconds");

    RenderArgs render;
    auto* rd = app.add_subcommand("render", "Render a session as an explanation document");
    rd->add_option("--session", render.session, "Session file")->required();
    rd->add_option("--format", render.format, "markdown or html")->check(CLI::IsMember({"markdown", "html"}));
    rd->add_option("--out", render.out, "Output file (default: stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (r->parsed()) return cmd_repair(repair, out, err);
        if (b->parsed()) return cmd_benchgen(bench, out, err);
        if (bl->parsed()) return cmd_baseline(base, out, err);
        if (ev->parsed()) return cmd_evaluate(eval, out, err);
        if (rd->parsed()) return cmd_render(render, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace autosd
