#include "autosd/report.hpp"

#include <stdexcept>

#include "autosd/experiment_dsl.hpp"
#include "autosd/prompting.hpp"
#include "autosd/text_util.hpp"

namespace autosd {

ReportFormat parse_report_format(std::string_view name) {
    auto n = to_lower(name);
    if (n == "markdown" || n == "md") return ReportFormat::Markdown;
    if (n == "html") return ReportFormat::Html;
    throw std::invalid_argument("unknown report format: " + std::string(name));
}

std::string_view verdict_color(Verdict v) {
    switch (v) {
        case Verdict::Supported: return "green";
        case Verdict::Rejected: return "red";
        case Verdict::Undecided: return "yellow";
    }
    return "gray";
}

std::string html_escape(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&#39;"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

std::string_view verdict_marker(Verdict v) {
    switch (v) {
        case Verdict::Supported: return "\xF0\x9F\x9F\xA9";  // green square
        case Verdict::Rejected: return "\xF0\x9F\x9F\xA5";   // red square
        case Verdict::Undecided: return "\xF0\x9F\x9F\xA8";  // yellow square
    }
    return "";
}

std::string_view hex_color(Verdict v) {
    switch (v) {
        case Verdict::Supported: return "#2da44e";
        case Verdict::Rejected: return "#cf222e";
        case Verdict::Undecided: return "#d4a72c";
    }
    return "#888888";
}

// A fence longer than any backtick run inside the text.
std::string fence_for(std::string_view text) {
    std::size_t longest = 0, run = 0;
    for (char c : text) {
        run = c == '`' ? run + 1 : 0;
        longest = std::max(longest, run);
    }
    return std::string(std::max<std::size_t>(3, longest + 1), '`');
}

std::string md_block(std::string_view text, std::string_view lang = "text") {
    auto fence = fence_for(text);
    std::string out = fence + std::string(lang) + "\n" + std::string(text);
    if (text.empty() || text.back() != '\n') out += '\n';
    return out + fence + "\n";
}

std::string canonical_experiment(const TraceStep& step) {
    return step.experiment ? render_experiment(*step.experiment) : step.experiment_raw;
}

std::string summary_of(const TraceStep& step) {
    auto s = hypothesis_summary(step.hypothesis);
    return s.empty() ? "(no hypothesis)" : s;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string markdown(const RepairSession& s) {
    std::string out = "# Debugging report: " + s.bug.id + " (attempt " + std::to_string(s.attempt) + ")\n\n";
    out += "- Buggy file: `" + s.bug.buggy_file.generic_string() + "` lines " + std::to_string(s.bug.method_span.start) +
           "-" + std::to_string(s.bug.method_span.end) + "\n";
    out += "- Failing test: `" + s.bug.failing_test_command + "`\n";
    out += "- Backend: `" + s.backend + "`\n";
    out += "- Termination: " + std::string(to_string(s.termination_reason)) + "\n";
    out += "- Confident: " + yes_no(s.confident) + "\n";
    if (s.config.ablate_debugger) out += "- Debugger ablated: observations were generated by the model\n";
    out += "\n## Steps\n\n";
    if (s.steps.empty()) out += "No debugging steps were completed.\n\n";
    for (const auto& step : s.steps) {
        out += "<details>\n<summary>" + std::string(verdict_marker(step.verdict)) + " <b>Step " +
               std::to_string(step.index) + " (" + std::string(to_string(step.verdict)) + ", " +
               std::string(verdict_color(step.verdict)) + ")</b>: " + html_escape(summary_of(step)) +
               "</summary>\n\n";
        out += "**Hypothesis**\n\n" + md_block(step.hypothesis) + "\n";
        out += "**Prediction**\n\n" + md_block(step.prediction) + "\n";
        out += "**Experiment**\n\n" + md_block(canonical_experiment(step));
        if (canonical_experiment(step) != step.experiment_raw) out += "\nAs written:\n\n" + md_block(step.experiment_raw);
        out += "\n**Observation**" + std::string(step.observation && !step.observation->grounded ? " (not executed)" : "") +
               "\n\n" + md_block(step.observation ? step.observation->rendered() : "(none)") + "\n";
        out += "**Conclusion**\n\n" + md_block(step.conclusion) + "\n</details>\n\n";
    }
    out += "## Patch\n\n";
    if (!s.patch) {
        out += "No patch was produced.\n";
    } else {
        out += "- Evaluation: " + std::string(to_string(s.patch->evaluation)) + "\n";
        if (!s.patch->evaluation_note.empty()) out += "- Note: " + s.patch->evaluation_note + "\n";
        if (s.patch->needs_manual_review) out += "- Plausible patches need manual review for correctness.\n";
        out += "\n";
        if (s.patch->applied_diff.empty()) out += "The patch does not change the file.\n\n";
        else out += md_block(s.patch->applied_diff, "diff") + "\n";
        out += "Replacement method:\n\n" + md_block(s.patch->replacement_method_source, to_string(s.bug.language));
    }
    out += "\nConfidence: " +
           std::string(s.confident ? "the debugging process ended with `<DEBUGGING DONE>`."
                                   : "the debugging process did not conclude; review the patch with extra care.") +
           "\n";
    return out;
}

std::string html_pre(std::string_view text) { return "<pre style=\"" "background:#f6f8fa;padding:8px;"
                                                     "white-space:pre-wrap;margin:4px 0 12px 0\">" +
                                                     html_escape(text) + "</pre>\n"; }

std::string html(const RepairSession& s) {
    std::string out =
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>Debugging report: " +
        html_escape(s.bug.id) + "</title>\n</head>\n<body style=\"font-family:sans-serif;max-width:960px;margin:24px auto\">\n";
    out += "<h1>Debugging report: " + html_escape(s.bug.id) + " (attempt " + std::to_string(s.attempt) + ")</h1>\n";
    out += "<ul>\n<li>Buggy file: <code>" + html_escape(s.bug.buggy_file.generic_string()) + "</code> lines " +
           std::to_string(s.bug.method_span.start) + "-" + std::to_string(s.bug.method_span.end) + "</li>\n";
    out += "<li>Failing test: <code>" + html_escape(s.bug.failing_test_command) + "</code></li>\n";
    out += "<li>Backend: <code>" + html_escape(s.backend) + "</code></li>\n";
    out += "<li>Termination: " + std::string(to_string(s.termination_reason)) + "</li>\n";
    out += "<li>Confident: " + yes_no(s.confident) + "</li>\n";
    if (s.config.ablate_debugger) out += "<li>Debugger ablated: observations were generated by the model</li>\n";
    out += "</ul>\n<h2>Steps</h2>\n";
    if (s.steps.empty()) out += "<p>No debugging steps were completed.</p>\n";
    for (const auto& step : s.steps) {
        out += "<details data-verdict=\"" + std::string(to_string(step.verdict)) +
               "\" style=\"margin:8px 0;border:1px solid #d0d7de\">\n<summary style=\"background:" +
               std::string(hex_color(step.verdict)) + ";color:#ffffff;padding:6px;cursor:pointer\">Step " +
               std::to_string(step.index) + " (" + std::string(to_string(step.verdict)) + "): " +
               html_escape(summary_of(step)) + "</summary>\n<div style=\"padding:8px\">\n";
        out += "<h4>Hypothesis</h4>\n" + html_pre(step.hypothesis);
        out += "<h4>Prediction</h4>\n" + html_pre(step.prediction);
        out += "<h4>Experiment</h4>\n" + html_pre(canonical_experiment(step));
        if (canonical_experiment(step) != step.experiment_raw) out += "<p>As written:</p>\n" + html_pre(step.experiment_raw);
        out += "<h4>Observation" + std::string(step.observation && !step.observation->grounded ? " (not executed)" : "") +
               "</h4>\n" + html_pre(step.observation ? step.observation->rendered() : "(none)");
        out += "<h4>Conclusion</h4>\n" + html_pre(step.conclusion) + "</div>\n</details>\n";
    }
    out += "<h2>Patch</h2>\n";
    if (!s.patch) {
        out += "<p>No patch was produced.</p>\n";
    } else {
        out += "<ul>\n<li>Evaluation: " + std::string(to_string(s.patch->evaluation)) + "</li>\n";
        if (!s.patch->evaluation_note.empty()) out += "<li>Note: " + html_escape(s.patch->evaluation_note) + "</li>\n";
        if (s.patch->needs_manual_review) out += "<li>Plausible patches need manual review for correctness.</li>\n";
        out += "</ul>\n";
        if (s.patch->applied_diff.empty()) {
            out += "<p>The patch does not change the file.</p>\n";
        } else {
            out += "<pre style=\"background:#f6f8fa;padding:8px\">";
            for (const auto& line : split_lines(s.patch->applied_diff)) {
                std::string_view color = !line.empty() && line[0] == '+' && line.rfind("+++", 0) != 0   ? "#1a7f37"
                                         : !line.empty() && line[0] == '-' && line.rfind("---", 0) != 0 ? "#cf222e"
                                                                                                         : "";
                if (color.empty()) out += html_escape(line) + "\n";
                else out += "<span style=\"color:" + std::string(color) + "\">" + html_escape(line) + "</span>\n";
            }
            out += "</pre>\n";
        }
        out += "<p>Replacement method:</p>\n" + html_pre(s.patch->replacement_method_source);
    }
    out += "<p>Confidence: " +
           html_escape(s.confident ? "the debugging process ended with <DEBUGGING DONE>."
                                   : "the debugging process did not conclude; review the patch with extra care.") +
           "</p>\n</body>\n</html>\n";
    return out;
}

}  // namespace

std::string render_report(const RepairSession& session, ReportFormat format) {
    return format == ReportFormat::Markdown ? markdown(session) : html(session);
}

}  // namespace autosd
