#include "autosd/prompting.hpp"

#include <cstdlib>

#include "autosd/text_util.hpp"

#ifndef AUTOSD_ASSET_DIR
#define AUTOSD_ASSET_DIR "assets"
#endif

namespace autosd {

PromptTooLarge::PromptTooLarge(std::size_t size, std::size_t cap)
    : std::runtime_error("prompt is " + std::to_string(size) + " bytes, over the cap of " + std::to_string(cap)) {}

namespace {

constexpr std::string_view kCue = "Hypothesis:";
constexpr std::string_view kAnalysisHeading = "## Analysis";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

std::string fenced(std::string_view body, std::string_view lang = "") {
    std::string out = "```" + std::string(lang) + "\n" + std::string(body);
    if (out.back() != '\n') out += '\n';
    return out + "```";
}

std::string conclusion_line(const TraceStep& step) {
    std::string text = step.conclusion;
    if (step.verdict == Verdict::Undecided && find_ci(text, "undecided") == std::string::npos) {
        if (!text.empty()) text += ' ';
        text += "(undecided due to experiment error)";
    }
    return text;
}

std::string render_head(const PromptDocument& doc) {
    std::string out = doc.sd_description;
    while (!out.empty() && out.back() == '\n') out.pop_back();
    out += "\n\n" + doc.bug_block + "\n\n" + std::string(kAnalysisHeading) + "\n\n";
    for (const auto& block : doc.step_blocks) out += block.text + "\n\n";
    return out;
}

void check_cap(const std::string& text, std::size_t cap) {
    if (text.size() > cap) throw PromptTooLarge(text.size(), cap);
}

}  // namespace

std::filesystem::path asset_dir() {
    if (const char* env = std::getenv("AUTOSD_ASSET_DIR"); env && *env) return env;
    return AUTOSD_ASSET_DIR;
}

std::string_view debugger_name(LanguageId language) {
    switch (language) {
        case LanguageId::Python: return "pdb";
    }
    return "debugger";
}

std::string load_sd_description(LanguageId language) {
    auto path = asset_dir() / "prompts" / std::string(to_string(language)) / "sd_description.txt";
    return replace_all(read_file(path.string()), "{debugger}", debugger_name(language));
}

std::string render_bug_block(const BugContext& bug, const PromptOptions& options) {
    const std::string lang(to_string(bug.language));
    std::string out = "## Buggy method\n\nFile: `" + bug.buggy_file.generic_string() + "`, lines " +
                      std::to_string(bug.method_span.start) + "-" + std::to_string(bug.method_span.end) + "\n\n" +
                      fenced(numbered_method_source(bug), lang) + "\n\n## Failing test\n\n";
    if (bug.failing_test_source) out += fenced(*bug.failing_test_source, lang) + "\n\n";
    out += "Command: `" + bug.failing_test_command + "`\n\n## Error message\n\n" +
           fenced(cap_bytes(bug.error_message, options.error_message_cap, "\n[... truncated]"));
    if (bug.bug_report) out += "\n\n## Bug report\n\n" + std::string(trim(*bug.bug_report));
    return out;
}

std::string PromptDocument::render() const {
    std::string out = render_head(*this);
    out += mode == PromptMode::Debugging ? std::string(kCue) : std::string(kFixSuffix);
    check_cap(out, byte_cap);
    return out;
}

PromptDocument build_initial_prompt(const BugContext& bug, const PromptOptions& options) {
    PromptDocument doc;
    doc.sd_description = load_sd_description(bug.language);
    doc.bug_block = render_bug_block(bug, options);
    doc.byte_cap = options.prompt_byte_cap;
    return doc;
}

std::string render_step(const TraceStep& step) {
    const std::string observation = step.observation ? step.observation->rendered() : std::string();
    return "Hypothesis: " + step.hypothesis + "\nPrediction: " + step.prediction + "\nExperiment: `" +
           step.experiment_raw + "`\nObservation: " + observation + "\nConclusion: " + conclusion_line(step);
}

PromptDocument append_step(const PromptDocument& doc, const TraceStep& step) {
    if (doc.mode != PromptMode::Debugging) throw std::logic_error("append_step on a fix-generation prompt");
    PromptDocument next = doc;
    next.step_blocks.push_back({step.index, step.verdict, render_step(step)});
    return next;
}

PromptDocument build_fix_prompt(const PromptDocument& doc, const std::vector<TraceStep>& steps) {
    PromptDocument fix = doc;
    fix.mode = PromptMode::FixGeneration;
    fix.step_blocks.clear();
    for (const auto& block : doc.step_blocks) {
        Verdict verdict = block.verdict;
        for (const auto& s : steps)
            if (s.index == block.index) verdict = s.verdict;
        if (verdict != Verdict::Rejected) fix.step_blocks.push_back(block);
    }
    return fix;
}

std::string render_partial(const PromptDocument& doc, const TraceStep& step, PartialCue cue) {
    std::string out = render_head(doc);
    out += "Hypothesis: " + step.hypothesis + "\nPrediction: " + step.prediction + "\nExperiment: `" +
           step.experiment_raw + "`\nObservation:";
    if (cue == PartialCue::Conclusion)
        out += " " + (step.observation ? step.observation->rendered() : std::string()) + "\nConclusion:";
    check_cap(out, doc.byte_cap);
    return out;
}

std::string hypothesis_summary(std::string_view hypothesis) {
    std::string_view text = trim(hypothesis);
    std::size_t end = text.size();
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\n') {
            end = i;
            break;
        }
        if ((c == '.' || c == '?' || c == '!') && (i + 1 == text.size() || text[i + 1] == ' ')) {
            end = i + 1;
            break;
        }
    }
    return truncate_utf8(trim(text.substr(0, end)), 120);
}

}  // namespace autosd
