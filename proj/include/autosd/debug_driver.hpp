#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

#include "autosd/experiment_dsl.hpp"
#include "autosd/observation.hpp"
#include "autosd/process.hpp"
#include "autosd/trace_model.hpp"

namespace autosd {

enum class TestStatus { Pass, Fail, Error, Timeout };

struct TestResult {
    TestStatus status = TestStatus::Fail;
    std::string exception_type;
    std::string exception_message;

    bool passed() const { return status == TestStatus::Pass; }
    bool operator==(const TestResult&) const = default;
};

struct ProbeResult {
    int hit_count = 0;
    std::vector<std::string> values;  // hit order, at most kMaxLoopValues
    std::optional<std::string> eval_error;
    TestResult test;

    bool operator==(const ProbeResult&) const = default;
};

/// Harness crashed, timed out on its own, or produced output outside the protocol.
class AdapterFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Boundary to whatever executes probes and tests. Implementations operate on
/// the snapshot directory they are handed and never on the canonical project.
class ExecutionAdapter {
public:
    virtual ~ExecutionAdapter() = default;

    virtual ProbeResult probe(const std::filesystem::path& snapshot_root, const SourceLocation& location,
                              const std::string& expression, const std::string& test_command,
                              std::chrono::seconds timeout) = 0;

    virtual TestResult run_test(const std::filesystem::path& snapshot_root, const std::string& test_command,
                                std::chrono::seconds timeout) = 0;
};

// ---- adapter record stream (docs/adapter-protocol.md) ----------------------

std::string_view to_string(TestStatus s);
std::string encode_probe_record(const ProbeResult& result);
std::string encode_test_record(const TestResult& result);
ProbeResult decode_probe_stream(std::string_view stream);
TestResult decode_test_stream(std::string_view stream);

/// Extracts the exception from a Python test run (traceback, then pytest summary).
TestResult test_result_from_process(const ProcessResult& run);

// ---- observations ----------------------------------------------------------

Observation observation_from_probe(const ProbeResult& result, const DebuggerProbe& probe,
                                   std::chrono::seconds timeout);
Observation observation_from_test(const TestResult& result, std::chrono::seconds timeout);

Observation execute_probe(ExecutionAdapter& adapter, const BugContext& bug,
                          const std::filesystem::path& snapshot_root, const DebuggerProbe& probe,
                          std::chrono::seconds timeout);

Observation execute_run(ExecutionAdapter& adapter, const std::filesystem::path& snapshot_root,
                        const std::string& test_command, std::chrono::seconds timeout);

// ---- adapters --------------------------------------------------------------

/// Spawns an external harness per invocation:
///   <harness...> probe <root> <file>:<line> <expr-b64> <test-cmd-b64> <timeout>
///   <harness...> run <root> <test-cmd-b64> <timeout>
class ProcessAdapter : public ExecutionAdapter {
public:
    explicit ProcessAdapter(std::vector<std::string> harness_argv,
                            std::chrono::seconds grace = std::chrono::seconds(5));

    ProbeResult probe(const std::filesystem::path& snapshot_root, const SourceLocation& location,
                      const std::string& expression, const std::string& test_command,
                      std::chrono::seconds timeout) override;
    TestResult run_test(const std::filesystem::path& snapshot_root, const std::string& test_command,
                        std::chrono::seconds timeout) override;

private:
    ProcessResult invoke(std::vector<std::string> args, std::chrono::seconds timeout) const;

    std::vector<std::string> harness_;
    std::chrono::seconds grace_;
};

/// Runs test commands directly through the shell. Probes are forwarded to an
/// optional delegate (usually a ProcessAdapter) and fail otherwise.
class LocalTestAdapter : public ExecutionAdapter {
public:
    explicit LocalTestAdapter(ExecutionAdapter* probe_delegate = nullptr) : probe_delegate_(probe_delegate) {}

    ProbeResult probe(const std::filesystem::path& snapshot_root, const SourceLocation& location,
                      const std::string& expression, const std::string& test_command,
                      std::chrono::seconds timeout) override;
    TestResult run_test(const std::filesystem::path& snapshot_root, const std::string& test_command,
                        std::chrono::seconds timeout) override;

private:
    ExecutionAdapter* probe_delegate_;
};

/// Answers probes from a fixture table keyed by (file, line, expression); test
/// runs go to the fallback adapter.
class ScriptedProbeAdapter : public ExecutionAdapter {
public:
    ScriptedProbeAdapter(std::map<std::tuple<std::string, int, std::string>, ProbeResult> table,
                         ExecutionAdapter& fallback)
        : table_(std::move(table)), fallback_(fallback) {}

    /// Loads a probe fixture file (docs/adapter-protocol.md, "Probe fixtures").
    static std::map<std::tuple<std::string, int, std::string>, ProbeResult> load_table(
        const std::filesystem::path& file);

    ProbeResult probe(const std::filesystem::path& snapshot_root, const SourceLocation& location,
                      const std::string& expression, const std::string& test_command,
                      std::chrono::seconds timeout) override;
    TestResult run_test(const std::filesystem::path& snapshot_root, const std::string& test_command,
                        std::chrono::seconds timeout) override {
        return fallback_.run_test(snapshot_root, test_command, timeout);
    }

private:
    std::map<std::tuple<std::string, int, std::string>, ProbeResult> table_;
    ExecutionAdapter& fallback_;
};

/// In-process adapter driven by callbacks; used by tests.
class FakeAdapter : public ExecutionAdapter {
public:
    using ProbeFn = std::function<ProbeResult(const std::filesystem::path&, const SourceLocation&,
                                              const std::string&, const std::string&)>;
    using RunFn = std::function<TestResult(const std::filesystem::path&, const std::string&)>;

    FakeAdapter(ProbeFn probe_fn, RunFn run_fn) : probe_fn_(std::move(probe_fn)), run_fn_(std::move(run_fn)) {}

    ProbeResult probe(const std::filesystem::path& root, const SourceLocation& location, const std::string& expression,
                      const std::string& test_command, std::chrono::seconds) override {
        std::lock_guard lock(mu_);
        ++probe_calls_;
        return probe_fn_(root, location, expression, test_command);
    }
    TestResult run_test(const std::filesystem::path& root, const std::string& test_command,
                        std::chrono::seconds) override {
        std::lock_guard lock(mu_);
        ++run_calls_;
        return run_fn_(root, test_command);
    }

    int probe_calls() const { return probe_calls_; }
    int run_calls() const { return run_calls_; }

private:
    ProbeFn probe_fn_;
    RunFn run_fn_;
    std::mutex mu_;
    int probe_calls_ = 0;
    int run_calls_ = 0;
};

/// Wraps an adapter and appends an ExecutionRecord per call under the current phase.
class AuditingAdapter : public ExecutionAdapter {
public:
    AuditingAdapter(ExecutionAdapter& inner, std::vector<ExecutionRecord>& log) : inner_(inner), log_(log) {}

    void set_phase(ExecutionPhase phase) { phase_ = phase; }

    ProbeResult probe(const std::filesystem::path& snapshot_root, const SourceLocation& location,
                      const std::string& expression, const std::string& test_command,
                      std::chrono::seconds timeout) override;
    TestResult run_test(const std::filesystem::path& snapshot_root, const std::string& test_command,
                        std::chrono::seconds timeout) override;

private:
    ExecutionAdapter& inner_;
    std::vector<ExecutionRecord>& log_;
    ExecutionPhase phase_ = ExecutionPhase::Loop;
};

}  // namespace autosd
