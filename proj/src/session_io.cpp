#include "autosd/session_io.hpp"

#include <array>
#include <json.hpp>

namespace autosd {

using ojson = nlohmann::ordered_json;

namespace {

template <typename Enum, std::size_t N>
Enum enum_from(std::string_view text, const std::array<Enum, N>& values, const std::string& path) {
    for (Enum v : values)
        if (to_string(v) == text) return v;
    throw SchemaError(path, "unknown value '" + std::string(text) + "'");
}

constexpr std::array kVerdicts{Verdict::Supported, Verdict::Rejected, Verdict::Undecided};
constexpr std::array kEvaluations{PatchEvaluation::Unevaluated, PatchEvaluation::Plausible,
                                  PatchEvaluation::Implausible};
constexpr std::array kReasons{TerminationReason::DoneToken, TerminationReason::StepLimit,
                              TerminationReason::ModelFailure, TerminationReason::DriverFailure};
constexpr std::array kPhases{ExecutionPhase::Precheck, ExecutionPhase::Loop, ExecutionPhase::Evaluation};
constexpr std::array kKinds{ExecutionKind::Probe, ExecutionKind::RunTest};
constexpr std::array kEditKinds{EditKind::Replace, EditKind::Add, EditKind::Delete};

ojson optional_text(const std::optional<std::string>& s) { return s ? ojson(*s) : ojson(nullptr); }

ojson script_to_json(const ExperimentScript& script) {
    ojson j;
    if (const auto* probe = std::get_if<DebuggerProbe>(&script)) {
        j["kind"] = "probe";
        j["file"] = probe->location.file;
        j["line"] = probe->location.line;
        j["expression"] = probe->expression;
        return j;
    }
    const auto& edits = std::get<EditScript>(script);
    j["kind"] = "edits";
    j["edits"] = ojson::array();
    for (const auto& e : edits.edits) {
        ojson je;
        je["op"] = std::string(to_string(e.kind));
        je["line"] = e.line;
        if (e.kind != EditKind::Add) je["old_expr"] = e.old_expr;
        if (e.kind != EditKind::Delete) je["new_expr"] = e.new_expr;
        j["edits"].push_back(je);
    }
    j["run_test"] = edits.run_test;
    return j;
}

ojson observation_to_json(const Observation& obs) {
    ojson j;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, observed::SingleValue>) {
                j["kind"] = "SingleValue";
                j["value"] = d.value;
            } else if constexpr (std::is_same_v<T, observed::LoopValues>) {
                j["kind"] = "LoopValues";
                j["hit_count"] = d.hit_count;
                j["values"] = d.values;
            } else if constexpr (std::is_same_v<T, observed::NoException>) {
                j["kind"] = "NoException";
            } else if constexpr (std::is_same_v<T, observed::ExceptionRaised>) {
                j["kind"] = "ExceptionRaised";
                j["type"] = d.type;
                j["message"] = d.message;
            } else if constexpr (std::is_same_v<T, observed::BreakpointNotHit>) {
                j["kind"] = "BreakpointNotHit";
                j["file"] = d.file;
                j["line"] = d.line;
            } else if constexpr (std::is_same_v<T, observed::ExperimentError>) {
                j["kind"] = "ExperimentError";
                j["message"] = d.message;
            } else if constexpr (std::is_same_v<T, observed::Timeout>) {
                j["kind"] = "Timeout";
                j["seconds"] = d.seconds;
            } else {
                j["kind"] = "Hallucinated";
                j["text"] = d.text;
            }
        },
        obs.detail);
    j["grounded"] = obs.grounded;
    j["rendered"] = obs.rendered();
    return j;
}

ojson bug_to_json(const BugContext& bug) {
    ojson j;
    j["id"] = bug.id;
    j["project_root"] = bug.project_root.string();
    j["buggy_file"] = bug.buggy_file.generic_string();
    j["method_span"] = {{"start", bug.method_span.start}, {"end", bug.method_span.end}};
    j["method_source"] = bug.method_source;
    j["failing_test_command"] = bug.failing_test_command;
    j["suite_commands"] = bug.suite_commands;
    j["error_message"] = bug.error_message;
    j["bug_report"] = optional_text(bug.bug_report);
    j["failing_test_source"] = optional_text(bug.failing_test_source);
    j["language"] = std::string(to_string(bug.language));
    return j;
}

/// Typed field access that reports the JSON path of whatever is wrong.
class Reader {
public:
    Reader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw SchemaError(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string at(std::string_view key) const { return path_ + "." + std::string(key); }

    const ojson& field(std::string_view key) const {
        auto it = j_.find(std::string(key));
        if (it == j_.end()) throw SchemaError(at(key), "missing field");
        return *it;
    }
    bool has(std::string_view key) const { return j_.contains(std::string(key)); }

    std::string str(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_string()) throw SchemaError(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::optional<std::string> opt_str(std::string_view key) const {
        const auto& v = field(key);
        if (v.is_null()) return std::nullopt;
        if (!v.is_string()) throw SchemaError(at(key), "expected a string or null");
        return v.get<std::string>();
    }
    std::int64_t integer(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_number_integer()) throw SchemaError(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }
    bool boolean(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_boolean()) throw SchemaError(at(key), "expected a boolean");
        return v.get<bool>();
    }
    const ojson& array(std::string_view key) const {
        const auto& v = field(key);
        if (!v.is_array()) throw SchemaError(at(key), "expected an array");
        return v;
    }
    std::vector<std::string> strings(std::string_view key) const {
        std::vector<std::string> out;
        const auto& arr = array(key);
        for (std::size_t i = 0; i < arr.size(); ++i) {
            if (!arr[i].is_string()) throw SchemaError(at(key) + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back(arr[i].get<std::string>());
        }
        return out;
    }
    Reader child(std::string_view key) const { return Reader(field(key), at(key)); }

private:
    const ojson& j_;
    std::string path_;
};

int to_int(std::int64_t v, const std::string& path) {
    if (v < INT32_MIN || v > INT32_MAX) throw SchemaError(path, "integer out of range");
    return int(v);
}

BugContext bug_from_json(const Reader& r) {
    BugContext bug;
    bug.id = r.str("id");
    bug.project_root = r.str("project_root");
    bug.buggy_file = r.str("buggy_file");
    auto span = r.child("method_span");
    bug.method_span.start = to_int(span.integer("start"), span.at("start"));
    bug.method_span.end = to_int(span.integer("end"), span.at("end"));
    bug.method_source = r.str("method_source");
    bug.failing_test_command = r.str("failing_test_command");
    bug.suite_commands = r.strings("suite_commands");
    bug.error_message = r.str("error_message");
    bug.bug_report = r.opt_str("bug_report");
    bug.failing_test_source = r.opt_str("failing_test_source");
    if (r.str("language") != "python") throw SchemaError(r.at("language"), "only 'python' is supported");
    return bug;
}

ExperimentScript script_from_json(const Reader& r) {
    const std::string kind = r.str("kind");
    if (kind == "probe") {
        DebuggerProbe p;
        p.location.file = r.str("file");
        p.location.line = to_int(r.integer("line"), r.at("line"));
        p.expression = r.str("expression");
        if (p.expression.empty()) throw SchemaError(r.at("expression"), "must be nonempty");
        return p;
    }
    if (kind != "edits") throw SchemaError(r.at("kind"), "expected 'probe' or 'edits'");
    EditScript script;
    const auto& arr = r.array("edits");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        Reader e(arr[i], r.at("edits") + "[" + std::to_string(i) + "]");
        Edit edit;
        edit.kind = enum_from(e.str("op"), kEditKinds, e.at("op"));
        edit.line = to_int(e.integer("line"), e.at("line"));
        if (edit.kind != EditKind::Add) edit.old_expr = e.str("old_expr");
        if (edit.kind != EditKind::Delete) edit.new_expr = e.str("new_expr");
        script.edits.push_back(std::move(edit));
    }
    script.run_test = r.boolean("run_test");
    if (script.edits.empty() && !script.run_test) throw SchemaError(r.at("edits"), "empty edit script without RUN");
    return script;
}

Observation observation_from_json(const Reader& r) {
    Observation obs;
    const std::string kind = r.str("kind");
    if (kind == "SingleValue") {
        obs.detail = observed::SingleValue{r.str("value")};
    } else if (kind == "LoopValues") {
        observed::LoopValues lv;
        lv.hit_count = to_int(r.integer("hit_count"), r.at("hit_count"));
        lv.values = r.strings("values");
        if (lv.values.size() > kMaxLoopValues) throw SchemaError(r.at("values"), "more than 100 values");
        obs.detail = std::move(lv);
    } else if (kind == "NoException") {
        obs.detail = observed::NoException{};
    } else if (kind == "ExceptionRaised") {
        obs.detail = observed::ExceptionRaised{r.str("type"), r.str("message")};
    } else if (kind == "BreakpointNotHit") {
        obs.detail = observed::BreakpointNotHit{r.str("file"), to_int(r.integer("line"), r.at("line"))};
    } else if (kind == "ExperimentError") {
        obs.detail = observed::ExperimentError{r.str("message")};
    } else if (kind == "Timeout") {
        obs.detail = observed::Timeout{to_int(r.integer("seconds"), r.at("seconds"))};
    } else if (kind == "Hallucinated") {
        obs.detail = observed::Hallucinated{r.str("text")};
    } else {
        throw SchemaError(r.at("kind"), "unknown observation kind '" + kind + "'");
    }
    obs.grounded = r.boolean("grounded");
    if (r.str("rendered") != obs.rendered()) throw SchemaError(r.at("rendered"), "does not match the detail");
    return obs;
}

}  // namespace

std::string serialize_session(const RepairSession& s) {
    ojson j;
    j["schema"] = std::string(kSessionSchema);
    j["bug"] = bug_to_json(s.bug);
    j["attempt"] = s.attempt;
    j["backend"] = s.backend;
    j["config"] = {{"max_steps", s.config.max_steps},
                   {"patch_budget", s.config.patch_budget},
                   {"ablate_debugger", s.config.ablate_debugger},
                   {"malformed_retry_limit", s.config.malformed_retry_limit},
                   {"per_experiment_timeout_s", s.config.per_experiment_timeout.count()},
                   {"random_seed", s.config.random_seed}};
    j["confident"] = s.confident;
    j["termination_reason"] = std::string(to_string(s.termination_reason));
    j["steps"] = ojson::array();
    for (const auto& step : s.steps) {
        ojson js;
        js["index"] = step.index;
        js["hypothesis"] = step.hypothesis;
        js["prediction"] = step.prediction;
        js["experiment"] = {{"raw", step.experiment_raw},
                            {"script", step.experiment ? script_to_json(*step.experiment) : ojson(nullptr)}};
        js["observation"] = step.observation ? observation_to_json(*step.observation) : ojson(nullptr);
        js["conclusion"] = step.conclusion;
        js["verdict"] = std::string(to_string(step.verdict));
        js["done"] = step.done;
        j["steps"].push_back(js);
    }
    if (s.patch) {
        j["patch"] = {{"replacement_method_source", s.patch->replacement_method_source},
                      {"applied_diff", s.patch->applied_diff},
                      {"evaluation", std::string(to_string(s.patch->evaluation))},
                      {"needs_manual_review", s.patch->needs_manual_review},
                      {"evaluation_note", s.patch->evaluation_note}};
    } else {
        j["patch"] = nullptr;
    }
    j["executions"] = ojson::array();
    for (const auto& e : s.executions)
        j["executions"].push_back(
            {{"phase", std::string(to_string(e.phase))}, {"kind", std::string(to_string(e.kind))}, {"target", e.target}});
    return j.dump(2) + "\n";
}

RepairSession deserialize_session(std::string_view document) {
    ojson j;
    try {
        j = ojson::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("$", std::string("not valid JSON: ") + e.what());
    }
    Reader root(j, "$");
    if (root.str("schema") != kSessionSchema)
        throw SchemaError("$.schema", "expected '" + std::string(kSessionSchema) + "'");

    RepairSession s;
    s.bug = bug_from_json(root.child("bug"));
    s.attempt = to_int(root.integer("attempt"), "$.attempt");
    s.backend = root.str("backend");
    {
        auto c = root.child("config");
        s.config.max_steps = to_int(c.integer("max_steps"), c.at("max_steps"));
        s.config.patch_budget = to_int(c.integer("patch_budget"), c.at("patch_budget"));
        s.config.ablate_debugger = c.boolean("ablate_debugger");
        s.config.malformed_retry_limit = to_int(c.integer("malformed_retry_limit"), c.at("malformed_retry_limit"));
        s.config.per_experiment_timeout = std::chrono::seconds(c.integer("per_experiment_timeout_s"));
        s.config.random_seed = c.integer("random_seed");
    }
    s.confident = root.boolean("confident");
    s.termination_reason = enum_from(root.str("termination_reason"), kReasons, "$.termination_reason");

    const auto& steps = root.array("steps");
    for (std::size_t i = 0; i < steps.size(); ++i) {
        Reader r(steps[i], "$.steps[" + std::to_string(i) + "]");
        TraceStep step;
        step.index = to_int(r.integer("index"), r.at("index"));
        step.hypothesis = r.str("hypothesis");
        step.prediction = r.str("prediction");
        auto exp = r.child("experiment");
        step.experiment_raw = exp.str("raw");
        if (!exp.field("script").is_null()) step.experiment = script_from_json(exp.child("script"));
        if (!r.field("observation").is_null()) step.observation = observation_from_json(r.child("observation"));
        step.conclusion = r.str("conclusion");
        step.verdict = enum_from(r.str("verdict"), kVerdicts, r.at("verdict"));
        step.done = r.boolean("done");
        s.steps.push_back(std::move(step));
    }

    if (!root.field("patch").is_null()) {
        auto p = root.child("patch");
        PatchCandidate patch;
        patch.replacement_method_source = p.str("replacement_method_source");
        patch.applied_diff = p.str("applied_diff");
        patch.evaluation = enum_from(p.str("evaluation"), kEvaluations, p.at("evaluation"));
        patch.needs_manual_review = p.boolean("needs_manual_review");
        patch.evaluation_note = p.str("evaluation_note");
        s.patch = std::move(patch);
    }

    const auto& execs = root.array("executions");
    for (std::size_t i = 0; i < execs.size(); ++i) {
        Reader r(execs[i], "$.executions[" + std::to_string(i) + "]");
        s.executions.push_back({enum_from(r.str("phase"), kPhases, r.at("phase")),
                                enum_from(r.str("kind"), kKinds, r.at("kind")), r.str("target")});
    }

    validate_session(s);
    return s;
}

}  // namespace autosd
