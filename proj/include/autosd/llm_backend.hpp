#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "autosd/trace_model.hpp"

namespace autosd {

class BackendUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedModelOutput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A replay entry's prompt assertion failed; indicates a broken fixture, not a model fault.
class ReplayMismatch : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct CompletionRequest {
    std::string prompt;
    std::vector<std::string> stop_sequences;
    int max_tokens = 1024;
    double temperature = 0.7;
    std::optional<std::int64_t> seed;
    int attempt = 0;  // which session is asking; the replay backend keeps one cursor per attempt
};

class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual std::string identity() const = 0;
};

/// Cuts text at the earliest occurrence of any stop sequence.
std::string apply_stop_sequences(std::string text, const std::vector<std::string>& stops);

// ---- replay ----------------------------------------------------------------

struct ReplayEntry {
    std::string text;
    std::optional<std::string> expect_prompt_prefix;
    std::optional<std::string> expect_prompt_suffix;
};

struct ReplayScript {
    std::string name;
    std::vector<ReplayEntry> completions;
};

ReplayScript parse_replay_script(const std::string& json_text, std::string name = "inline");
std::string serialize_replay_script(const ReplayScript& script);

/// Attempt k reads script k mod N; each attempt has its own cursor.
class ReplayBackend : public ModelBackend {
public:
    explicit ReplayBackend(std::vector<ReplayScript> scripts);

    /// A single *.replay file, or a directory whose *.replay files are taken in name order.
    static std::unique_ptr<ReplayBackend> load(const std::filesystem::path& path);

    std::string complete(const CompletionRequest& request) override;
    std::string identity() const override;

    std::size_t script_count() const { return scripts_.size(); }
    std::size_t consumed(int attempt) const;

private:
    std::vector<ReplayScript> scripts_;
    mutable std::mutex mu_;
    std::map<int, std::size_t> cursors_;
};

// ---- http ------------------------------------------------------------------

struct HttpBackendConfig {
    std::string api_base;  // e.g. https://api.example.com/v1
    std::string api_key;
    std::string model;
    int max_retries = 3;
    int timeout_seconds = 120;

    /// Reads AUTOSD_API_BASE, AUTOSD_API_KEY and AUTOSD_MODEL; throws BackendUnavailable when unset.
    static HttpBackendConfig from_env();
};

/// Chat-completion style endpoint: POST {api_base}/chat/completions.
class HttpBackend : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {}

    std::string complete(const CompletionRequest& request) override;
    std::string identity() const override { return "http:" + config_.model; }

    /// The JSON body sent for a request; exposed for tests.
    std::string request_body(const CompletionRequest& request) const;

private:
    HttpBackendConfig config_;
};

// ---- output parsing --------------------------------------------------------

struct StepFragment {
    std::string hypothesis;
    std::string prediction;
    std::string experiment_raw;
};

struct ConclusionFragment {
    std::string text;
    Verdict verdict = Verdict::Undecided;
    bool done = false;
};

StepFragment parse_step_fragment(std::string_view completion);

/// Earliest of "reject", "support", "undecided" wins (case-insensitive).
Verdict parse_verdict(std::string_view text);
ConclusionFragment parse_conclusion(std::string_view completion);

/// Content of the fenced block that the fix prompt opened.
std::string parse_fix(std::string_view completion);

// ---- requests --------------------------------------------------------------

struct RequestContext {
    int attempt = 0;
    std::optional<std::int64_t> seed;
    double temperature = 0.7;
    int max_tokens = 1024;
    int malformed_retry_limit = 2;
};

StepFragment request_hypothesis(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx);
ConclusionFragment request_conclusion(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx);
std::string request_fix(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx);
std::string hallucinate_observation(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx);

}  // namespace autosd
