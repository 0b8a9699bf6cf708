#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "autosd/trace_model.hpp"

namespace autosd {

inline constexpr std::string_view kFixSuffix = "The repaired code (full method, without comments) is:\n```";

class PromptTooLarge : public std::runtime_error {
public:
    PromptTooLarge(std::size_t size, std::size_t cap);
};

struct PromptOptions {
    std::size_t error_message_cap = 4096;  // bytes
    std::size_t prompt_byte_cap = 256 * 1024;
};

enum class PromptMode { Debugging, FixGeneration };

struct StepBlock {
    int index = 0;
    Verdict verdict = Verdict::Undecided;
    std::string text;

    bool operator==(const StepBlock&) const = default;
};

struct PromptDocument {
    std::string sd_description;
    std::string bug_block;
    std::vector<StepBlock> step_blocks;
    PromptMode mode = PromptMode::Debugging;
    std::size_t byte_cap = PromptOptions{}.prompt_byte_cap;

    /// Debugging documents end with the `Hypothesis:` cue; fix documents with kFixSuffix.
    std::string render() const;

    bool operator==(const PromptDocument&) const = default;
};

/// Directory holding prompts/<language>/sd_description.txt. AUTOSD_ASSET_DIR overrides the built-in path.
std::filesystem::path asset_dir();

std::string_view debugger_name(LanguageId language);

/// The shipped description with the debugger name substituted.
std::string load_sd_description(LanguageId language);

std::string render_bug_block(const BugContext& bug, const PromptOptions& options = {});

PromptDocument build_initial_prompt(const BugContext& bug, const PromptOptions& options = {});

/// Text of a completed step, without a trailing newline.
std::string render_step(const TraceStep& step);

PromptDocument append_step(const PromptDocument& doc, const TraceStep& step);

/// Drops Rejected steps and switches to fix generation.
PromptDocument build_fix_prompt(const PromptDocument& doc, const std::vector<TraceStep>& steps);

enum class PartialCue { Observation, Conclusion };

/// The document followed by the in-progress step, ending at the given cue.
std::string render_partial(const PromptDocument& doc, const TraceStep& step, PartialCue cue);

/// First sentence of the hypothesis, at most 120 characters.
std::string hypothesis_summary(std::string_view hypothesis);

}  // namespace autosd
