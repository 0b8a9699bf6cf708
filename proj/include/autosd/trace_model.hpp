#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autosd/experiment_dsl.hpp"
#include "autosd/observation.hpp"

namespace autosd {

inline constexpr std::string_view kDoneToken = "<DEBUGGING DONE>";

enum class LanguageId { Python };

struct LineSpan {
    int start = 1;  // inclusive, 1-based absolute file lines
    int end = 1;

    bool operator==(const LineSpan&) const = default;
    bool contains(int line) const { return line >= start && line <= end; }
};

/// Everything the engine knows about one bug.
struct BugContext {
    std::string id;
    std::filesystem::path project_root;
    std::filesystem::path buggy_file;  // relative to project_root
    LineSpan method_span;
    std::string method_source;  // raw method lines, newline-terminated
    std::string failing_test_command;
    std::vector<std::string> suite_commands;  // empty: the failing test is the suite
    std::string error_message;
    std::optional<std::string> bug_report;
    std::optional<std::string> failing_test_source;
    LanguageId language = LanguageId::Python;

    bool operator==(const BugContext&) const = default;

    /// Commands that make up the full test suite used for plausibility.
    std::vector<std::string> effective_suite() const;
};

/// The method with absolute file line numbers prefixed, as shown to the model.
std::string numbered_method_source(const BugContext& bug);

enum class Verdict { Supported, Rejected, Undecided };

struct TraceStep {
    int index = 1;
    std::string hypothesis;
    std::string prediction;
    std::string experiment_raw;
    std::optional<ExperimentScript> experiment;  // absent when the raw text failed to parse
    std::optional<Observation> observation;      // absent until executed
    std::string conclusion;
    Verdict verdict = Verdict::Undecided;
    bool done = false;

    bool operator==(const TraceStep&) const = default;
};

struct SessionConfig {
    int max_steps = 3;
    int patch_budget = 10;
    bool ablate_debugger = false;
    int malformed_retry_limit = 2;
    std::chrono::seconds per_experiment_timeout{30};
    std::int64_t random_seed = 0;

    bool operator==(const SessionConfig&) const = default;
};

enum class PatchEvaluation { Unevaluated, Plausible, Implausible };

struct PatchCandidate {
    std::string replacement_method_source;
    std::string applied_diff;
    PatchEvaluation evaluation = PatchEvaluation::Unevaluated;
    bool needs_manual_review = false;
    std::string evaluation_note;

    bool operator==(const PatchCandidate&) const = default;
};

enum class TerminationReason { DoneToken, StepLimit, ModelFailure, DriverFailure };

enum class ExecutionPhase { Precheck, Loop, Evaluation };
enum class ExecutionKind { Probe, RunTest };

/// One adapter invocation, kept so a session shows exactly what was executed.
struct ExecutionRecord {
    ExecutionPhase phase = ExecutionPhase::Loop;
    ExecutionKind kind = ExecutionKind::RunTest;
    std::string target;  // "file:line expr" for probes, the test command for runs

    bool operator==(const ExecutionRecord&) const = default;
};

struct RepairSession {
    BugContext bug;
    int attempt = 0;
    std::string backend;  // backend identity
    SessionConfig config;
    std::vector<TraceStep> steps;
    std::optional<PatchCandidate> patch;
    bool confident = false;
    TerminationReason termination_reason = TerminationReason::StepLimit;
    std::vector<ExecutionRecord> executions;

    bool operator==(const RepairSession&) const = default;
};

class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string& message)
        : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Throws SchemaError naming the first violated session invariant.
void validate_session(const RepairSession& session);

std::string_view to_string(Verdict v);
std::string_view to_string(PatchEvaluation e);
std::string_view to_string(TerminationReason r);
std::string_view to_string(ExecutionPhase p);
std::string_view to_string(ExecutionKind k);
std::string_view to_string(LanguageId id);

}  // namespace autosd
