#include "autosd/orchestrator.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "autosd/eval_harness.hpp"
#include "autosd/experiment_dsl.hpp"
#include "autosd/patch_executor.hpp"
#include "autosd/session_io.hpp"
#include "autosd/text_util.hpp"

namespace fs = std::filesystem;

namespace autosd {

std::string_view to_string(WorkerState s) {
    switch (s) {
        case WorkerState::Hypothesizing: return "Hypothesizing";
        case WorkerState::Observing: return "Observing";
        case WorkerState::Concluding: return "Concluding";
        case WorkerState::Fixing: return "Fixing";
        case WorkerState::Done: return "Done";
        case WorkerState::Aborted: return "Aborted";
    }
    return "?";
}

bool SessionWorker::legal_transition(WorkerState from, WorkerState to) {
    using S = WorkerState;
    if (to == S::Aborted) return from != S::Done;
    switch (from) {
        case S::Hypothesizing: return to == S::Observing || to == S::Fixing;
        case S::Observing: return to == S::Concluding || to == S::Fixing;
        case S::Concluding: return to == S::Hypothesizing || to == S::Fixing;
        case S::Fixing: return to == S::Done;
        default: return false;
    }
}

void SessionWorker::transition(WorkerState to) {
    if (!legal_transition(state_, to))
        throw std::logic_error(std::string("illegal worker transition ") + std::string(to_string(state_)) + " -> " +
                               std::string(to_string(to)));
    state_ = to;
}

SessionWorker::SessionWorker(const BugContext& bug, SessionConfig config, ModelBackend& backend,
                             ExecutionAdapter& adapter, int attempt, SessionOptions options)
    : bug_(bug), config_(config), backend_(backend), adapter_(adapter), attempt_(attempt), options_(std::move(options)) {}

void SessionWorker::emit(int step, std::string kind, std::string detail) const {
    if (options_.progress) options_.progress({attempt_, step, std::move(kind), std::move(detail)});
}

void check_reproducible(ExecutionAdapter& adapter, const BugContext& bug, std::chrono::seconds timeout) {
    auto snapshot = ProjectSnapshot::create(bug.project_root);
    auto result = adapter.run_test(snapshot.root(), bug.failing_test_command, timeout);
    if (result.status == TestStatus::Pass)
        throw BugNotReproducible("failing test passes on the unmodified project: " + bug.failing_test_command);
    if (result.status == TestStatus::Timeout)
        throw BugNotReproducible("failing test timed out on the unmodified project: " + bug.failing_test_command);
}

Observation SessionWorker::observe(const TraceStep& step, AuditingAdapter& adapter, const PromptDocument& doc,
                                   const RequestContext& ctx) {
    if (config_.ablate_debugger) {
        auto text = hallucinate_observation(backend_, render_partial(doc, step, PartialCue::Observation), ctx);
        return Observation{observed::Hallucinated{std::move(text)}, false};
    }
    if (!step.experiment) {
        // The raw text failed to parse; the parse error was stored by the caller.
        return Observation{observed::ExperimentError{"invalid experiment"}, true};
    }
    const auto timeout = config_.per_experiment_timeout;
    if (const auto* probe = std::get_if<DebuggerProbe>(&*step.experiment)) {
        auto snapshot = ProjectSnapshot::create(bug_.project_root);
        return execute_probe(adapter, bug_, snapshot.root(), *probe, timeout);
    }
    const auto& script = std::get<EditScript>(*step.experiment);
    auto snapshot = ProjectSnapshot::create(bug_.project_root);
    try {
        apply_edits(snapshot, bug_.buggy_file, script.edits);
    } catch (const EditError& e) {
        return Observation{observed::ExperimentError{e.what()}, true};
    }
    if (!script.run_test)
        return Observation{observed::ExperimentError{"edits were applied but RUN was not requested, so nothing ran"},
                           true};
    return run_failing_test(adapter, snapshot, bug_, timeout);
}

RepairSession SessionWorker::run() {
    RepairSession session;
    session.bug = bug_;
    session.attempt = attempt_;
    session.backend = backend_.identity();
    session.config = config_;
    session.termination_reason = TerminationReason::StepLimit;

    AuditingAdapter audited(adapter_, session.executions);
    if (options_.precheck) {
        audited.set_phase(ExecutionPhase::Precheck);
        check_reproducible(audited, bug_, config_.per_experiment_timeout);
    }
    audited.set_phase(ExecutionPhase::Loop);
    emit(0, "session_started", bug_.id);

    RequestContext ctx;
    ctx.attempt = attempt_;
    ctx.seed = config_.random_seed;
    ctx.temperature = options_.temperature;
    ctx.max_tokens = options_.max_tokens;
    ctx.malformed_retry_limit = config_.malformed_retry_limit;

    PromptDocument doc = build_initial_prompt(bug_, options_.prompt);
    bool aborted = false;

    for (int index = 1; index <= config_.max_steps; ++index) {
        emit(index, "step_started", "");
        TraceStep step;
        step.index = index;
        try {
            auto fragment = request_hypothesis(backend_, doc.render(), ctx);
            step.hypothesis = fragment.hypothesis;
            step.prediction = fragment.prediction;
            step.experiment_raw = fragment.experiment_raw;
        } catch (const MalformedModelOutput& e) {
            session.termination_reason = TerminationReason::ModelFailure;
            emit(index, "model_failure", e.what());
            aborted = true;
            break;
        } catch (const BackendUnavailable& e) {
            session.termination_reason = TerminationReason::ModelFailure;
            emit(index, "model_failure", e.what());
            aborted = true;
            break;
        }

        transition(WorkerState::Observing);
        std::optional<std::string> parse_error;
        try {
            step.experiment = parse_experiment(step.experiment_raw);
        } catch (const ExperimentParseError& e) {
            parse_error = e.what();
        }
        try {
            if (parse_error && !config_.ablate_debugger)
                step.observation = Observation{observed::ExperimentError{*parse_error}, true};
            else
                step.observation = observe(step, audited, doc, ctx);
        } catch (const AdapterFailure& e) {
            session.steps.push_back(step);
            session.termination_reason = TerminationReason::DriverFailure;
            emit(index, "driver_failure", e.what());
            aborted = true;
            break;
        } catch (const BackendUnavailable& e) {
            session.steps.push_back(step);
            session.termination_reason = TerminationReason::ModelFailure;
            emit(index, "model_failure", e.what());
            aborted = true;
            break;
        }
        emit(index, "observation", step.observation->rendered());

        transition(WorkerState::Concluding);
        try {
            auto conclusion = request_conclusion(backend_, render_partial(doc, step, PartialCue::Conclusion), ctx);
            step.conclusion = conclusion.text;
            step.verdict = step.observation->is_experiment_error() ? Verdict::Undecided : conclusion.verdict;
            step.done = conclusion.done;
        } catch (const std::runtime_error& e) {
            if (!dynamic_cast<const MalformedModelOutput*>(&e) && !dynamic_cast<const BackendUnavailable*>(&e)) throw;
            session.steps.push_back(step);
            session.termination_reason = TerminationReason::ModelFailure;
            emit(index, "model_failure", e.what());
            aborted = true;
            break;
        }
        session.steps.push_back(step);
        doc = append_step(doc, step);
        emit(index, "verdict", std::string(to_string(step.verdict)));
        if (step.done) {
            session.termination_reason = TerminationReason::DoneToken;
            session.confident = true;
            emit(index, "done", "");
            break;
        }
        if (index < config_.max_steps) transition(WorkerState::Hypothesizing);
    }

    // Fix generation is attempted even after a failure; the pruned trace may still help.
    transition(WorkerState::Fixing);
    auto fix_doc = build_fix_prompt(doc, session.steps);
    try {
        PatchCandidate patch;
        patch.replacement_method_source = request_fix(backend_, fix_doc.render(), ctx);
        try {
            auto snapshot = ProjectSnapshot::create(bug_.project_root);
            patch.applied_diff = apply_method_patch(snapshot, bug_, patch.replacement_method_source);
            if (patch.applied_diff.empty()) {
                patch.evaluation = PatchEvaluation::Implausible;
                patch.evaluation_note = "no-op: replacement equals the original method";
            }
        } catch (const ReplacementSyntaxError& e) {
            patch.evaluation = PatchEvaluation::Implausible;
            patch.evaluation_note = e.what();
        }
        session.patch = std::move(patch);
        emit(0, "fix", session.patch->applied_diff.empty() ? "no diff" : "diff produced");
    } catch (const MalformedModelOutput& e) {
        emit(0, "fix_failed", e.what());
    } catch (const BackendUnavailable& e) {
        emit(0, "fix_failed", e.what());
    }
    state_ = aborted ? WorkerState::Aborted : WorkerState::Done;
    emit(0, "session_finished", std::string(to_string(session.termination_reason)));
    return session;
}

RepairSession run_session(const BugContext& bug, const SessionConfig& config, ModelBackend& backend,
                          ExecutionAdapter& adapter, int attempt, const SessionOptions& options) {
    SessionWorker worker(bug, config, backend, adapter, attempt, options);
    return worker.run();
}

fs::path session_path(const fs::path& out_dir, const std::string& bug_id, int attempt) {
    return out_dir / "sessions" / bug_id / ("attempt_" + std::to_string(attempt) + ".session");
}

RepairRun run_repair(const BugContext& bug, const SessionConfig& config, ModelBackend& backend,
                     ExecutionAdapter& adapter, const RepairOptions& options) {
    check_reproducible(adapter, bug, config.per_experiment_timeout);

    const int budget = config.patch_budget;
    int jobs = options.jobs > 0 ? options.jobs : int(std::max(1u, std::thread::hardware_concurrency()));
    jobs = std::max(1, std::min(jobs, budget));

    std::vector<std::optional<RepairSession>> slots(static_cast<std::size_t>(budget));
    std::vector<std::string> errors(static_cast<std::size_t>(budget));
    std::atomic<int> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mu;

    auto worker = [&] {
        for (int k = next++; k < budget; k = next++) {
            try {
                SessionConfig cfg = config;
                cfg.random_seed = config.random_seed + k;
                SessionOptions so = options.session;
                so.precheck = false;
                auto session = run_session(bug, cfg, backend, adapter, k, so);
                if (options.evaluate && session.patch &&
                    session.patch->evaluation == PatchEvaluation::Unevaluated) {
                    AuditingAdapter audited(adapter, session.executions);
                    audited.set_phase(ExecutionPhase::Evaluation);
                    evaluate_patch(bug, *session.patch, audited, cfg.per_experiment_timeout);
                }
                slots[std::size_t(k)] = std::move(session);
            } catch (const ReplayMismatch&) {
                std::lock_guard lock(fatal_mu);
                if (!fatal) fatal = std::current_exception();
            } catch (const std::exception& e) {
                errors[std::size_t(k)] = "attempt " + std::to_string(k) + ": " + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (fatal) std::rethrow_exception(fatal);

    RepairRun run;
    for (int k = 0; k < budget; ++k) {
        if (auto& slot = slots[std::size_t(k)]) {
            slot->executions.insert(slot->executions.begin(),
                                    {ExecutionPhase::Precheck, ExecutionKind::RunTest, bug.failing_test_command});
            run.sessions.push_back(std::move(*slot));
        }
        if (!errors[std::size_t(k)].empty()) run.failures.push_back(errors[std::size_t(k)]);
    }
    if (run.sessions.empty())
        throw std::runtime_error("no session could start: " + (run.failures.empty() ? "" : run.failures.front()));

    if (options.out_dir) {
        for (const auto& s : run.sessions) {
            auto path = session_path(*options.out_dir, bug.id, s.attempt);
            fs::create_directories(path.parent_path());
            write_file(path.string(), serialize_session(s));
            auto diff = path;
            diff.replace_extension(".diff");
            write_file(diff.string(), s.patch ? s.patch->applied_diff : std::string());
        }
    }
    return run;
}

}  // namespace autosd
