#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autosd/debug_driver.hpp"
#include "autosd/llm_backend.hpp"
#include "autosd/prompting.hpp"
#include "autosd/trace_model.hpp"

namespace autosd {

class BugNotReproducible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProgressEvent {
    int attempt = 0;
    int step = 0;  // 0 for session-level events
    std::string kind;  // session_started, step_started, observation, verdict, done, fix, session_finished
    std::string detail;
};

using ProgressSink = std::function<void(const ProgressEvent&)>;

struct SessionOptions {
    PromptOptions prompt;
    double temperature = 0.7;
    int max_tokens = 1024;
    bool precheck = true;
    ProgressSink progress;
};

enum class WorkerState { Hypothesizing, Observing, Concluding, Fixing, Done, Aborted };

std::string_view to_string(WorkerState s);

/// Drives one hypothesize-observe-conclude session.
class SessionWorker {
public:
    SessionWorker(const BugContext& bug, SessionConfig config, ModelBackend& backend, ExecutionAdapter& adapter,
                  int attempt = 0, SessionOptions options = {});

    RepairSession run();
    WorkerState state() const { return state_; }

    static bool legal_transition(WorkerState from, WorkerState to);

private:
    void transition(WorkerState to);
    Observation observe(const TraceStep& step, AuditingAdapter& adapter, const PromptDocument& doc,
                        const RequestContext& ctx);
    void emit(int step, std::string kind, std::string detail) const;

    const BugContext& bug_;
    SessionConfig config_;
    ModelBackend& backend_;
    ExecutionAdapter& adapter_;
    int attempt_;
    SessionOptions options_;
    WorkerState state_ = WorkerState::Hypothesizing;
};

/// Throws BugNotReproducible unless the failing test fails on a pristine snapshot.
void check_reproducible(ExecutionAdapter& adapter, const BugContext& bug, std::chrono::seconds timeout);

RepairSession run_session(const BugContext& bug, const SessionConfig& config, ModelBackend& backend,
                          ExecutionAdapter& adapter, int attempt = 0, const SessionOptions& options = {});

struct RepairOptions {
    SessionOptions session;
    int jobs = 0;  // 0: min(patch_budget, hardware threads)
    bool evaluate = true;
    std::optional<std::filesystem::path> out_dir;  // sessions/<bug id>/attempt_<k>.session and .diff
};

struct RepairRun {
    std::vector<RepairSession> sessions;  // ordered by attempt
    std::vector<std::string> failures;    // attempts that could not produce a session at all
};

/// patch_budget independent sessions with seeds random_seed + k.
RepairRun run_repair(const BugContext& bug, const SessionConfig& config, ModelBackend& backend,
                     ExecutionAdapter& adapter, const RepairOptions& options = {});

std::filesystem::path session_path(const std::filesystem::path& out_dir, const std::string& bug_id, int attempt);

}  // namespace autosd
