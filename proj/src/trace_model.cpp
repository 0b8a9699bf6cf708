#include "autosd/trace_model.hpp"

#include "autosd/text_util.hpp"

namespace autosd {

std::vector<std::string> BugContext::effective_suite() const {
    if (!suite_commands.empty()) return suite_commands;
    return {failing_test_command};
}

std::string numbered_method_source(const BugContext& bug) {
    auto lines = split_lines(bug.method_source);
    const std::size_t width = std::to_string(bug.method_span.start + int(lines.size()) - 1).size();
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string number = std::to_string(bug.method_span.start + int(i));
        out += std::string(width - number.size(), ' ') + number;
        if (!lines[i].empty()) out += ' ' + lines[i];
        out += '\n';
    }
    return out;
}

void validate_session(const RepairSession& s) {
    if (s.config.max_steps < 1) throw SchemaError("$.config.max_steps", "must be >= 1");
    if (s.config.patch_budget < 1) throw SchemaError("$.config.patch_budget", "must be >= 1");
    if (s.config.malformed_retry_limit < 0) throw SchemaError("$.config.malformed_retry_limit", "must be >= 0");
    if (s.bug.method_span.start < 1 || s.bug.method_span.start > s.bug.method_span.end)
        throw SchemaError("$.bug.method_span", "start must be >= 1 and <= end");
    if (s.steps.size() > std::size_t(s.config.max_steps))
        throw SchemaError("$.steps", "has " + std::to_string(s.steps.size()) + " steps but max_steps is " +
                                         std::to_string(s.config.max_steps));

    bool any_done = false;
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
        const auto& step = s.steps[i];
        const std::string path = "$.steps[" + std::to_string(i) + "]";
        const bool last = i + 1 == s.steps.size();
        if (step.index != int(i) + 1) throw SchemaError(path + ".index", "must be " + std::to_string(i + 1));
        if (step.observation && step.observation->is_experiment_error() && step.verdict != Verdict::Undecided)
            throw SchemaError(path + ".verdict", "must be Undecided when the observation is an experiment error");
        if (step.done) {
            if (step.conclusion.find(kDoneToken) == std::string::npos)
                throw SchemaError(path + ".done", "conclusion does not contain the done token");
            if (!last) throw SchemaError(path + ".done", "only the final step may be done");
            any_done = true;
        }
        if (!step.observation) {
            if (!last) throw SchemaError(path + ".observation", "only the final step may lack an observation");
            if (s.termination_reason != TerminationReason::ModelFailure &&
                s.termination_reason != TerminationReason::DriverFailure)
                throw SchemaError(path + ".observation",
                                  "missing observation requires termination_reason ModelFailure or DriverFailure");
        }
    }
    if (s.confident != any_done) throw SchemaError("$.confident", "must be true iff some step is done");
    if (s.confident != (s.termination_reason == TerminationReason::DoneToken))
        throw SchemaError("$.termination_reason", "DoneToken iff the session is confident");
    if (s.patch && s.patch->needs_manual_review != (s.patch->evaluation == PatchEvaluation::Plausible))
        throw SchemaError("$.patch.needs_manual_review", "must be true iff the patch is Plausible");
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Supported: return "Supported";
        case Verdict::Rejected: return "Rejected";
        case Verdict::Undecided: return "Undecided";
    }
    return "?";
}

std::string_view to_string(PatchEvaluation e) {
    switch (e) {
        case PatchEvaluation::Unevaluated: return "Unevaluated";
        case PatchEvaluation::Plausible: return "Plausible";
        case PatchEvaluation::Implausible: return "Implausible";
    }
    return "?";
}

std::string_view to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::DoneToken: return "DoneToken";
        case TerminationReason::StepLimit: return "StepLimit";
        case TerminationReason::ModelFailure: return "ModelFailure";
        case TerminationReason::DriverFailure: return "DriverFailure";
    }
    return "?";
}

std::string_view to_string(ExecutionPhase p) {
    switch (p) {
        case ExecutionPhase::Precheck: return "precheck";
        case ExecutionPhase::Loop: return "loop";
        case ExecutionPhase::Evaluation: return "evaluation";
    }
    return "?";
}

std::string_view to_string(ExecutionKind k) {
    return k == ExecutionKind::Probe ? "probe" : "run_test";
}

std::string_view to_string(LanguageId) { return "python"; }

}  // namespace autosd
