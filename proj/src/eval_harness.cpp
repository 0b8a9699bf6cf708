#include "autosd/eval_harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "autosd/patch_executor.hpp"

using json = nlohmann::ordered_json;

namespace autosd {

PatchEvaluation evaluate_patch(const BugContext& bug, PatchCandidate& patch, ExecutionAdapter& adapter,
                               std::chrono::seconds timeout) {
    auto finish = [&](PatchEvaluation e, std::string note) {
        patch.evaluation = e;
        patch.needs_manual_review = e == PatchEvaluation::Plausible;
        patch.evaluation_note = std::move(note);
        return e;
    };
    auto snapshot = ProjectSnapshot::create(bug.project_root);
    std::string diff;
    try {
        diff = apply_method_patch(snapshot, bug, patch.replacement_method_source);
    } catch (const ReplacementSyntaxError& e) {
        return finish(PatchEvaluation::Implausible, e.what());
    } catch (const SpanMismatch& e) {
        return finish(PatchEvaluation::Implausible, e.what());
    }
    patch.applied_diff = diff;
    if (diff.empty()) return finish(PatchEvaluation::Implausible, "no-op: replacement equals the original method");

    for (const auto& cmd : bug.effective_suite()) {
        auto result = adapter.run_test(snapshot.root(), cmd, timeout);
        if (result.status == TestStatus::Timeout)
            return finish(PatchEvaluation::Implausible,
                          "timed out after " + std::to_string(timeout.count()) + "s: " + cmd);
        if (!result.passed()) {
            std::string why = result.exception_type.empty() ? "failed" : result.exception_type;
            if (!result.exception_message.empty()) why += ": " + result.exception_message;
            return finish(PatchEvaluation::Implausible, "`" + cmd + "` " + why);
        }
    }
    return finish(PatchEvaluation::Plausible, "all tests pass");
}

MeanStd mean_stddev(const std::vector<double>& samples) {
    MeanStd m;
    m.n = samples.size();
    if (samples.empty()) return m;
    double sum = 0;
    for (double s : samples) sum += s;
    m.mean = sum / double(samples.size());
    if (samples.size() > 1) {
        double sq = 0;
        for (double s : samples) sq += (s - m.mean) * (s - m.mean);
        m.stddev = std::sqrt(sq / double(samples.size() - 1));
    }
    return m;
}

std::string format_mean_std(const MeanStd& m, int decimals) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*f \xC2\xB1 %.*f", decimals, m.mean, decimals, m.stddev);
    return buf;
}

std::optional<double> PartitionStats::precision() const {
    if (attempts == 0) return std::nullopt;
    return double(plausible) / double(attempts);
}

namespace {

ModeSummary summarize(const std::vector<const RepairSession*>& sessions) {
    ModeSummary s;
    std::map<std::string, BugOutcome> bugs;
    for (const auto* session : sessions) {
        auto& b = bugs[session->bug.id];
        b.bug_id = session->bug.id;
        ++b.attempts;
        const bool plausible = session->patch && session->patch->evaluation == PatchEvaluation::Plausible;
        if (plausible) ++b.plausible;
        if (!session->patch) ++b.no_patch;
        if (session->confident) ++b.confident;
        auto& part = session->confident ? s.confident : s.not_confident;
        ++part.attempts;
        ++s.total.attempts;
        if (plausible) {
            ++part.plausible;
            ++s.total.plausible;
        }
    }
    for (auto& [id, b] : bugs) {
        b.fixed = b.plausible > 0;
        if (b.fixed) ++s.bugs_fixed;
        s.bugs.push_back(b);
    }
    return s;
}

std::string pct(const std::optional<double>& p) {
    if (!p) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *p);
    return buf;
}

json summary_json(const ModeSummary& s) {
    auto part = [](const PartitionStats& p) {
        json j{{"attempts", p.attempts}, {"plausible", p.plausible}};
        j["precision"] = p.precision() ? json(*p.precision()) : json(nullptr);
        return j;
    };
    json j;
    j["bugs_fixed"] = s.bugs_fixed;
    j["attempts"] = part(s.total);
    j["confident"] = part(s.confident);
    j["not_confident"] = part(s.not_confident);
    j["bugs"] = json::array();
    for (const auto& b : s.bugs)
        j["bugs"].push_back({{"id", b.bug_id},
                             {"attempts", b.attempts},
                             {"plausible", b.plausible},
                             {"confident", b.confident},
                             {"no_patch", b.no_patch},
                             {"fixed", b.fixed}});
    return j;
}

void table(std::string& out, const std::string& title, const ModeSummary& s, int size) {
    out += title + "\n";
    out += "  bugs fixed (plausible): " + std::to_string(s.bugs_fixed) + " / " + std::to_string(size) + "\n";
    out += "  attempts:               " + std::to_string(s.total.plausible) + " plausible of " +
           std::to_string(s.total.attempts) + " (precision " + pct(s.total.precision()) + ")\n";
    out += "  confident (done):       " + std::to_string(s.confident.plausible) + " / " +
           std::to_string(s.confident.attempts) + " (precision " + pct(s.confident.precision()) + ")\n";
    out += "  not confident:          " + std::to_string(s.not_confident.plausible) + " / " +
           std::to_string(s.not_confident.attempts) + " (precision " + pct(s.not_confident.precision()) + ")\n";
    if (!s.bugs.empty()) {
        out += "\n  bug                              attempts plausible confident fixed\n";
        for (const auto& b : s.bugs) {
            char line[256];
            std::snprintf(line, sizeof line, "  %-32s %8d %9d %9d %5s\n", b.bug_id.c_str(), b.attempts, b.plausible,
                          b.confident, b.fixed ? "yes" : "no");
            out += line;
        }
    }
}

}  // namespace

AggregateReport aggregate(const std::vector<RepairSession>& sessions, std::optional<int> benchmark_size) {
    std::vector<const RepairSession*> grounded, ablated;
    std::map<std::string, int> ids;
    for (const auto& s : sessions) {
        (s.config.ablate_debugger ? ablated : grounded).push_back(&s);
        ids[s.bug.id] = 1;
    }
    AggregateReport r;
    r.benchmark_size = benchmark_size.value_or(int(ids.size()));
    r.grounded = summarize(grounded);
    if (!ablated.empty()) r.ablated = summarize(ablated);
    return r;
}

std::string render_aggregate_table(const AggregateReport& report) {
    std::string out;
    table(out, "Grounded sessions", report.grounded, report.benchmark_size);
    if (report.ablated) {
        out += "\n";
        table(out, "Ablated sessions (debugger hallucinated)", *report.ablated, report.benchmark_size);
    }
    return out;
}

std::string aggregate_to_json(const AggregateReport& report) {
    json j;
    j["format"] = "autosd-results/1";
    j["benchmark_size"] = report.benchmark_size;
    j["grounded"] = summary_json(report.grounded);
    j["ablated"] = report.ablated ? summary_json(*report.ablated) : json(nullptr);
    return j.dump(2) + "\n";
}

}  // namespace autosd
