#include "autosd/llm_backend.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "autosd/text_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace autosd {

std::string apply_stop_sequences(std::string text, const std::vector<std::string>& stops) {
    std::size_t cut = text.size();
    for (const auto& s : stops) {
        if (s.empty()) continue;
        if (auto pos = text.find(s); pos != std::string::npos) cut = std::min(cut, pos);
    }
    text.resize(cut);
    return text;
}

// ---- replay ----------------------------------------------------------------

ReplayScript parse_replay_script(const std::string& json_text, std::string name) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("replay script " + name + ": " + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "autosd-replay/1")
        throw std::runtime_error("replay script " + name + ": expected format autosd-replay/1");
    if (!doc.contains("completions") || !doc["completions"].is_array())
        throw std::runtime_error("replay script " + name + ": missing completions array");
    ReplayScript script{std::move(name), {}};
    for (const auto& c : doc["completions"]) {
        ReplayEntry e;
        if (c.is_string()) {
            e.text = c.get<std::string>();
        } else {
            e.text = c.at("text").get<std::string>();
            if (c.contains("expect_prompt_prefix")) e.expect_prompt_prefix = c["expect_prompt_prefix"].get<std::string>();
            if (c.contains("expect_prompt_suffix")) e.expect_prompt_suffix = c["expect_prompt_suffix"].get<std::string>();
        }
        script.completions.push_back(std::move(e));
    }
    return script;
}

std::string serialize_replay_script(const ReplayScript& script) {
    json doc;
    doc["format"] = "autosd-replay/1";
    doc["completions"] = json::array();
    for (const auto& e : script.completions) {
        json c;
        c["text"] = e.text;
        if (e.expect_prompt_prefix) c["expect_prompt_prefix"] = *e.expect_prompt_prefix;
        if (e.expect_prompt_suffix) c["expect_prompt_suffix"] = *e.expect_prompt_suffix;
        doc["completions"].push_back(std::move(c));
    }
    return doc.dump(2) + "\n";
}

ReplayBackend::ReplayBackend(std::vector<ReplayScript> scripts) : scripts_(std::move(scripts)) {
    if (scripts_.empty()) throw std::runtime_error("replay backend needs at least one script");
}

std::unique_ptr<ReplayBackend> ReplayBackend::load(const fs::path& path) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& e : fs::directory_iterator(path))
            if (e.is_regular_file() && e.path().extension() == ".replay") files.push_back(e.path());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw std::runtime_error("no .replay files in " + path.string());
    } else if (fs::is_regular_file(path)) {
        files.push_back(path);
    } else {
        throw std::runtime_error("replay script not found: " + path.string());
    }
    std::vector<ReplayScript> scripts;
    for (const auto& f : files) scripts.push_back(parse_replay_script(read_file(f.string()), f.filename().string()));
    return std::make_unique<ReplayBackend>(std::move(scripts));
}

std::string ReplayBackend::complete(const CompletionRequest& request) {
    std::lock_guard lock(mu_);
    const auto& script = scripts_[std::size_t(request.attempt) % scripts_.size()];
    std::size_t& cursor = cursors_[request.attempt];
    if (cursor >= script.completions.size())
        throw BackendUnavailable("replay script " + script.name + " exhausted after " +
                                 std::to_string(script.completions.size()) + " completions");
    const auto& entry = script.completions[cursor];
    const std::size_t position = cursor++;
    auto where = [&] { return "replay script " + script.name + " entry " + std::to_string(position); };
    if (entry.expect_prompt_prefix && request.prompt.rfind(*entry.expect_prompt_prefix, 0) != 0)
        throw ReplayMismatch(where() + ": prompt does not start with the expected prefix");
    if (entry.expect_prompt_suffix) {
        const auto& sfx = *entry.expect_prompt_suffix;
        if (request.prompt.size() < sfx.size() ||
            request.prompt.compare(request.prompt.size() - sfx.size(), sfx.size(), sfx) != 0)
            throw ReplayMismatch(where() + ": prompt does not end with the expected suffix");
    }
    return apply_stop_sequences(entry.text, request.stop_sequences);
}

std::string ReplayBackend::identity() const {
    std::string id = "replay:" + scripts_.front().name;
    if (scripts_.size() > 1) id += "+" + std::to_string(scripts_.size() - 1);
    return id;
}

std::size_t ReplayBackend::consumed(int attempt) const {
    std::lock_guard lock(mu_);
    auto it = cursors_.find(attempt);
    return it == cursors_.end() ? 0 : it->second;
}

// ---- http ------------------------------------------------------------------

HttpBackendConfig HttpBackendConfig::from_env() {
    auto get = [](const char* name) -> std::string {
        const char* v = std::getenv(name);
        if (!v || !*v) throw BackendUnavailable(std::string(name) + " is not set");
        return v;
    };
    HttpBackendConfig c;
    c.api_base = get("AUTOSD_API_BASE");
    c.api_key = get("AUTOSD_API_KEY");
    c.model = get("AUTOSD_MODEL");
    return c;
}

std::string HttpBackend::request_body(const CompletionRequest& request) const {
    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (!request.stop_sequences.empty()) {
        // Most chat APIs accept at most four stop sequences.
        auto stops = request.stop_sequences;
        if (stops.size() > 4) stops.resize(4);
        body["stop"] = stops;
    }
    if (request.seed) body["seed"] = *request.seed;
    return body.dump();
}

std::string HttpBackend::complete(const CompletionRequest& request) {
    std::string base = config_.api_base;
    while (!base.empty() && base.back() == '/') base.pop_back();
    const auto scheme_end = base.find("://");
    const auto path_begin = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string host = path_begin == std::string::npos ? base : base.substr(0, path_begin);
    const std::string path = (path_begin == std::string::npos ? std::string() : base.substr(path_begin)) +
                             "/chat/completions";

    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(std::chrono::seconds(config_.timeout_seconds));
    httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
    const std::string body = request_body(request);

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(250 << std::min(attempt, 5)));
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw BackendUnavailable("HTTP " + std::to_string(res->status) + ": " + res->body);
        try {
            auto doc = json::parse(res->body);
            auto text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
            return apply_stop_sequences(std::move(text), request.stop_sequences);
        } catch (const json::exception& e) {
            throw BackendUnavailable(std::string("unexpected response: ") + e.what());
        }
    }
    throw BackendUnavailable("backend unreachable after " + std::to_string(config_.max_retries + 1) +
                             " tries: " + last_error);
}

// ---- output parsing --------------------------------------------------------

namespace {

/// Content of the first backtick span at or after `from`.
std::optional<std::string> first_code_span(std::string_view text, std::size_t from) {
    auto tick = text.find('`', from);
    if (tick == std::string_view::npos) return std::nullopt;
    if (text.compare(tick, 3, "```") == 0) {
        auto close = text.find("```", tick + 3);
        if (close == std::string_view::npos) return std::nullopt;
        std::string_view body = text.substr(tick + 3, close - tick - 3);
        if (auto nl = body.find('\n'); nl != std::string_view::npos) {
            auto tag = trim(body.substr(0, nl));
            if (tag.find(' ') == std::string_view::npos) body.remove_prefix(nl + 1);
        }
        return std::string(trim(body));
    }
    auto close = text.find('`', tick + 1);
    if (close == std::string_view::npos) return std::nullopt;
    return std::string(trim(text.substr(tick + 1, close - tick - 1)));
}

}  // namespace

StepFragment parse_step_fragment(std::string_view completion) {
    if (auto obs = completion.find("Observation:"); obs != std::string_view::npos) completion = completion.substr(0, obs);
    auto pred = completion.find("Prediction:");
    if (pred == std::string_view::npos) throw MalformedModelOutput("missing Prediction: header");
    auto exp = completion.find("Experiment:", pred);
    if (exp == std::string_view::npos) throw MalformedModelOutput("missing Experiment: header");
    StepFragment f;
    f.hypothesis = std::string(trim(completion.substr(0, pred)));
    f.prediction = std::string(trim(completion.substr(pred + 11, exp - pred - 11)));
    auto span = first_code_span(completion, exp + 11);
    if (!span) throw MalformedModelOutput("experiment is not wrapped in backticks");
    f.experiment_raw = *span;
    if (f.hypothesis.empty()) throw MalformedModelOutput("empty hypothesis");
    if (f.prediction.empty()) throw MalformedModelOutput("empty prediction");
    if (f.experiment_raw.empty()) throw MalformedModelOutput("empty experiment");
    return f;
}

Verdict parse_verdict(std::string_view text) {
    struct Key {
        std::string_view word;
        Verdict verdict;
    };
    static constexpr Key keys[] = {
        {"reject", Verdict::Rejected}, {"support", Verdict::Supported}, {"undecided", Verdict::Undecided}};
    std::size_t best = std::string_view::npos;
    Verdict verdict = Verdict::Undecided;
    for (const auto& k : keys) {
        auto pos = find_ci(text, k.word);
        if (pos < best) {
            best = pos;
            verdict = k.verdict;
        }
    }
    if (best == std::string_view::npos) throw MalformedModelOutput("conclusion names no verdict");
    return verdict;
}

ConclusionFragment parse_conclusion(std::string_view completion) {
    ConclusionFragment c;
    c.text = std::string(trim(completion));
    c.verdict = parse_verdict(c.text);
    c.done = c.text.find(kDoneToken) != std::string::npos;
    return c;
}

std::string parse_fix(std::string_view completion) {
    std::string_view s = completion;
    // The prompt already opened the fence; tolerate a model that opens it again.
    std::string_view probe = s;
    while (!probe.empty() && (probe.front() == ' ' || probe.front() == '\n' || probe.front() == '\r'))
        probe.remove_prefix(1);
    if (probe.substr(0, 3) == "```") s = probe.substr(3);
    if (auto nl = s.find('\n'); nl != std::string_view::npos) {
        auto tag = trim(s.substr(0, nl));
        bool bare = std::all_of(tag.begin(), tag.end(), [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '+' || ch == '-';
        });
        if (bare) s.remove_prefix(nl + 1);
    }
    auto close = s.find("```");
    if (close == std::string_view::npos) throw MalformedModelOutput("no closing code fence");
    std::string_view body = s.substr(0, close);
    while (!body.empty() && (body.front() == '\n' || body.front() == '\r')) body.remove_prefix(1);
    body = trim_right(body);
    if (trim(body).empty()) throw MalformedModelOutput("empty code block");
    return std::string(body);
}

// ---- requests --------------------------------------------------------------

namespace {

CompletionRequest make_request(const std::string& prompt, std::vector<std::string> stops, const RequestContext& ctx) {
    CompletionRequest r;
    r.prompt = prompt;
    r.stop_sequences = std::move(stops);
    r.max_tokens = ctx.max_tokens;
    r.temperature = ctx.temperature;
    r.seed = ctx.seed;
    r.attempt = ctx.attempt;
    return r;
}

}  // namespace

StepFragment request_hypothesis(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx) {
    auto request = make_request(prompt, {"Observation:"}, ctx);
    for (int tries = 0;; ++tries) {
        try {
            return parse_step_fragment(backend.complete(request));
        } catch (const MalformedModelOutput&) {
            if (tries >= ctx.malformed_retry_limit) throw;
        }
    }
}

ConclusionFragment request_conclusion(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx) {
    return parse_conclusion(backend.complete(make_request(prompt, {"Hypothesis:"}, ctx)));
}

std::string request_fix(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx) {
    return parse_fix(backend.complete(make_request(prompt, {}, ctx)));
}

std::string hallucinate_observation(ModelBackend& backend, const std::string& prompt, const RequestContext& ctx) {
    return std::string(trim(backend.complete(make_request(prompt, {"Conclusion:"}, ctx))));
}

}  // namespace autosd
