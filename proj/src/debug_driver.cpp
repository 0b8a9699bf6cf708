#include "autosd/debug_driver.hpp"

#include <json.hpp>
#include <regex>

#include "autosd/text_util.hpp"

namespace autosd {

using json = nlohmann::ordered_json;

std::string render_observation(const ObservationDetail& detail) {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, observed::SingleValue>) {
                return d.value;
            } else if constexpr (std::is_same_v<T, observed::LoopValues>) {
                return "At each loop execution, the expression was: [" + join(d.values, ", ") + "]";
            } else if constexpr (std::is_same_v<T, observed::NoException>) {
                return "[No exception triggered]";
            } else if constexpr (std::is_same_v<T, observed::ExceptionRaised>) {
                return d.message.empty() ? d.type : d.type + ": " + d.message;
            } else if constexpr (std::is_same_v<T, observed::BreakpointNotHit>) {
                return "[Breakpoint at " + d.file + ":" + std::to_string(d.line) + " was not hit]";
            } else if constexpr (std::is_same_v<T, observed::ExperimentError>) {
                return "[Experiment error: " + d.message + "]";
            } else if constexpr (std::is_same_v<T, observed::Timeout>) {
                return "[Experiment timed out after " + std::to_string(d.seconds) + "s]";
            } else {
                return d.text;
            }
        },
        detail);
}

// ---- protocol --------------------------------------------------------------

std::string_view to_string(TestStatus s) {
    switch (s) {
        case TestStatus::Pass: return "pass";
        case TestStatus::Fail: return "fail";
        case TestStatus::Error: return "error";
        case TestStatus::Timeout: return "timeout";
    }
    return "?";
}

namespace {

TestStatus status_from(std::string_view s) {
    for (auto st : {TestStatus::Pass, TestStatus::Fail, TestStatus::Error, TestStatus::Timeout})
        if (to_string(st) == s) return st;
    throw AdapterFailure("unknown test_status '" + std::string(s) + "'");
}

std::vector<json> parse_records(std::string_view stream) {
    std::vector<json> records;
    for (const auto& raw : split_lines(stream)) {
        auto line = trim(raw);
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw AdapterFailure("unparseable adapter output line: " + std::string(line.substr(0, 120)));
        }
        if (!j.is_object() || !j.contains("record") || !j["record"].is_string())
            throw AdapterFailure("adapter record without a 'record' field");
        records.push_back(std::move(j));
    }
    return records;
}

std::string string_field(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw AdapterFailure(std::string("record field '") + key + "' missing");
    return j[key].get<std::string>();
}

TestResult test_from_record(const json& j) {
    TestResult r;
    r.status = status_from(string_field(j, "test_status"));
    r.exception_type = string_field(j, "exception_type");
    r.exception_message = string_field(j, "exception_message");
    return r;
}

const json& single(const std::vector<json>& records, std::string_view kind) {
    const json* found = nullptr;
    for (const auto& r : records) {
        if (r["record"] != kind) continue;
        if (found) throw AdapterFailure("duplicate '" + std::string(kind) + "' record");
        found = &r;
    }
    if (!found) throw AdapterFailure("missing '" + std::string(kind) + "' record");
    return *found;
}

}  // namespace

std::string encode_probe_record(const ProbeResult& r) {
    json j;
    j["record"] = "probe";
    j["hit_count"] = r.hit_count;
    j["values"] = r.values;
    j["eval_error"] = r.eval_error ? json(*r.eval_error) : json(nullptr);
    return j.dump() + "\n" + encode_test_record(r.test);
}

std::string encode_test_record(const TestResult& r) {
    json j;
    j["record"] = "test";
    j["test_status"] = std::string(to_string(r.status));
    j["exception_type"] = r.exception_type;
    j["exception_message"] = r.exception_message;
    return j.dump() + "\n";
}

ProbeResult decode_probe_stream(std::string_view stream) {
    auto records = parse_records(stream);
    const json& p = single(records, "probe");
    ProbeResult r;
    if (!p.contains("hit_count") || !p["hit_count"].is_number_integer() || p["hit_count"].get<int>() < 0)
        throw AdapterFailure("probe record needs a non-negative integer hit_count");
    r.hit_count = p["hit_count"].get<int>();
    if (!p.contains("values") || !p["values"].is_array()) throw AdapterFailure("probe record needs a values array");
    for (const auto& v : p["values"]) {
        if (!v.is_string()) throw AdapterFailure("probe values must be strings");
        r.values.push_back(v.get<std::string>());
    }
    if (r.values.size() > kMaxLoopValues) throw AdapterFailure("probe record carries more than 100 values");
    if (r.values.size() > std::size_t(r.hit_count)) throw AdapterFailure("more values than hits");
    if (p.contains("eval_error") && !p["eval_error"].is_null()) {
        if (!p["eval_error"].is_string()) throw AdapterFailure("eval_error must be a string or null");
        r.eval_error = p["eval_error"].get<std::string>();
    }
    r.test = test_from_record(single(records, "test"));
    return r;
}

TestResult decode_test_stream(std::string_view stream) {
    auto records = parse_records(stream);
    for (const auto& r : records)
        if (r["record"] != "test") throw AdapterFailure("unexpected '" + r["record"].get<std::string>() + "' record");
    return test_from_record(single(records, "test"));
}

TestResult test_result_from_process(const ProcessResult& run) {
    TestResult r;
    if (run.timed_out) {
        r.status = TestStatus::Timeout;
        return r;
    }
    if (run.ok()) {
        r.status = TestStatus::Pass;
        return r;
    }
    r.status = TestStatus::Fail;

    auto lines = split_lines(run.stderr_text);
    std::size_t header = std::string::npos;
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (lines[i].rfind("Traceback (most recent call last):", 0) == 0) header = i;
    static const std::regex exc_line(R"(^([A-Za-z_][\w.]*)(?::\s?(.*))?$)");
    if (header != std::string::npos) {
        for (std::size_t i = header + 1; i < lines.size(); ++i) {
            const auto& line = lines[i];
            if (line.empty() || line[0] == ' ' || line[0] == '\t') continue;
            std::smatch m;
            if (!std::regex_match(line, m, exc_line)) continue;
            r.exception_type = m[1];
            std::string message = m[2];
            for (std::size_t k = i + 1; k < lines.size(); ++k) message += "\n" + lines[k];
            r.exception_message = std::string(trim_right(message));
            break;
        }
    }
    if (r.exception_type.empty()) {
        // pytest: "FAILED path::test - Type: message"
        static const std::regex pytest_line(R"(^FAILED \S+ - ([A-Za-z_][\w.]*)(?::\s?(.*))?$)");
        for (const auto& line : split_lines(run.stdout_text)) {
            std::smatch m;
            if (std::regex_match(line, m, pytest_line)) {
                r.exception_type = m[1];
                r.exception_message = m[2];
                break;
            }
        }
    }
    if (r.exception_type.empty()) {
        r.exception_type = "TestFailure";
        r.exception_message = run.signaled ? "test process was killed by a signal"
                                           : "test command exited with status " + std::to_string(run.exit_code);
    }
    if (r.exception_type != "AssertionError" && r.exception_type != "TestFailure") r.status = TestStatus::Error;
    return r;
}

// ---- observations ----------------------------------------------------------

Observation observation_from_probe(const ProbeResult& result, const DebuggerProbe& probe,
                                   std::chrono::seconds timeout) {
    Observation obs;
    if (result.test.status == TestStatus::Timeout) {
        obs.detail = observed::Timeout{int(timeout.count())};
    } else if (result.hit_count == 0) {
        obs.detail = observed::BreakpointNotHit{probe.location.file, probe.location.line};
    } else if (result.eval_error) {
        obs.detail = observed::ExperimentError{*result.eval_error};
    } else if (result.values.empty()) {
        throw AdapterFailure("probe reported hits but no values");
    } else if (result.hit_count == 1) {
        obs.detail = observed::SingleValue{truncate_utf8(result.values.front(), kMaxValueChars)};
    } else {
        observed::LoopValues loop;
        loop.hit_count = result.hit_count;
        const std::size_t n = std::min(result.values.size(), kMaxLoopValues);
        for (std::size_t i = 0; i < n; ++i) loop.values.push_back(truncate_utf8(result.values[i], kMaxValueChars));
        obs.detail = std::move(loop);
    }
    return obs;
}

Observation observation_from_test(const TestResult& result, std::chrono::seconds timeout) {
    Observation obs;
    switch (result.status) {
        case TestStatus::Pass: obs.detail = observed::NoException{}; break;
        case TestStatus::Timeout: obs.detail = observed::Timeout{int(timeout.count())}; break;
        case TestStatus::Fail:
        case TestStatus::Error:
            obs.detail = observed::ExceptionRaised{
                result.exception_type.empty() ? std::string("TestFailure") : result.exception_type,
                result.exception_type.empty() && result.exception_message.empty()
                    ? std::string("test failed without an exception")
                    : result.exception_message};
            break;
    }
    return obs;
}

Observation execute_probe(ExecutionAdapter& adapter, const BugContext& bug, const std::filesystem::path& snapshot_root,
                          const DebuggerProbe& probe, std::chrono::seconds timeout) {
    auto result = adapter.probe(snapshot_root, probe.location, probe.expression, bug.failing_test_command, timeout);
    return observation_from_probe(result, probe, timeout);
}

Observation execute_run(ExecutionAdapter& adapter, const std::filesystem::path& snapshot_root,
                        const std::string& test_command, std::chrono::seconds timeout) {
    return observation_from_test(adapter.run_test(snapshot_root, test_command, timeout), timeout);
}

// ---- ProcessAdapter --------------------------------------------------------

ProcessAdapter::ProcessAdapter(std::vector<std::string> harness_argv, std::chrono::seconds grace)
    : harness_(std::move(harness_argv)), grace_(grace) {
    if (harness_.empty()) throw std::invalid_argument("ProcessAdapter needs a harness command");
}

ProcessResult ProcessAdapter::invoke(std::vector<std::string> args, std::chrono::seconds timeout) const {
    std::vector<std::string> argv = harness_;
    argv.insert(argv.end(), args.begin(), args.end());
    return run_process(argv, std::filesystem::current_path(), timeout + grace_);
}

ProbeResult ProcessAdapter::probe(const std::filesystem::path& root, const SourceLocation& location,
                                  const std::string& expression, const std::string& test_command,
                                  std::chrono::seconds timeout) {
    auto run = invoke({"probe", root.string(), location.file + ":" + std::to_string(location.line),
                       base64_encode(expression), base64_encode(test_command), std::to_string(timeout.count())},
                      timeout);
    if (run.timed_out) {
        ProbeResult r;
        r.test.status = TestStatus::Timeout;
        return r;
    }
    if (!run.ok()) throw AdapterFailure("harness exited abnormally: " + std::string(trim(run.stderr_text)));
    return decode_probe_stream(run.stdout_text);
}

TestResult ProcessAdapter::run_test(const std::filesystem::path& root, const std::string& test_command,
                                    std::chrono::seconds timeout) {
    auto run = invoke({"run", root.string(), base64_encode(test_command), std::to_string(timeout.count())}, timeout);
    if (run.timed_out) return TestResult{TestStatus::Timeout, {}, {}};
    if (!run.ok()) throw AdapterFailure("harness exited abnormally: " + std::string(trim(run.stderr_text)));
    return decode_test_stream(run.stdout_text);
}

// ---- LocalTestAdapter ------------------------------------------------------

ProbeResult LocalTestAdapter::probe(const std::filesystem::path& root, const SourceLocation& location,
                                    const std::string& expression, const std::string& test_command,
                                    std::chrono::seconds timeout) {
    if (!probe_delegate_) throw AdapterFailure("no debugger harness configured for probes");
    return probe_delegate_->probe(root, location, expression, test_command, timeout);
}

TestResult LocalTestAdapter::run_test(const std::filesystem::path& root, const std::string& test_command,
                                      std::chrono::seconds timeout) {
    return test_result_from_process(run_shell(test_command, root, timeout));
}

// ---- ScriptedProbeAdapter --------------------------------------------------

std::map<std::tuple<std::string, int, std::string>, ProbeResult> ScriptedProbeAdapter::load_table(
    const std::filesystem::path& file) {
    json j;
    try {
        j = json::parse(read_file(file.string()));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("probe fixture " + file.string() + ": " + e.what());
    }
    std::map<std::tuple<std::string, int, std::string>, ProbeResult> table;
    for (const auto& p : j.at("probes")) {
        ProbeResult r;
        r.hit_count = p.at("hit_count").get<int>();
        r.values = p.value("values", std::vector<std::string>{});
        if (p.contains("eval_error") && !p["eval_error"].is_null()) r.eval_error = p["eval_error"].get<std::string>();
        r.test.status = status_from(p.value("test_status", std::string("fail")));
        r.test.exception_type = p.value("exception_type", std::string());
        r.test.exception_message = p.value("exception_message", std::string());
        table[{p.at("file").get<std::string>(), p.at("line").get<int>(), p.at("expression").get<std::string>()}] = r;
    }
    return table;
}

ProbeResult ScriptedProbeAdapter::probe(const std::filesystem::path&, const SourceLocation& location,
                                        const std::string& expression, const std::string&, std::chrono::seconds) {
    auto it = table_.find({location.file, location.line, expression});
    if (it == table_.end())
        throw AdapterFailure("no scripted probe for " + location.file + ":" + std::to_string(location.line) + " " +
                             expression);
    return it->second;
}

// ---- AuditingAdapter -------------------------------------------------------

ProbeResult AuditingAdapter::probe(const std::filesystem::path& root, const SourceLocation& location,
                                   const std::string& expression, const std::string& test_command,
                                   std::chrono::seconds timeout) {
    log_.push_back({phase_, ExecutionKind::Probe,
                    location.file + ":" + std::to_string(location.line) + " " + expression});
    return inner_.probe(root, location, expression, test_command, timeout);
}

TestResult AuditingAdapter::run_test(const std::filesystem::path& root, const std::string& test_command,
                                     std::chrono::seconds timeout) {
    log_.push_back({phase_, ExecutionKind::RunTest, test_command});
    return inner_.run_test(root, test_command, timeout);
}

}  // namespace autosd
