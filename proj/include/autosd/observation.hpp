#pragma once

#include <string>
#include <variant>
#include <vector>

namespace autosd {

inline constexpr std::size_t kMaxLoopValues = 100;
inline constexpr std::size_t kMaxValueChars = 256;

namespace observed {

struct SingleValue {
    std::string value;
    bool operator==(const SingleValue&) const = default;
};
struct LoopValues {
    int hit_count = 0;
    std::vector<std::string> values;  // at most kMaxLoopValues, in hit order
    bool operator==(const LoopValues&) const = default;
};
struct NoException {
    bool operator==(const NoException&) const = default;
};
struct ExceptionRaised {
    std::string type;
    std::string message;
    bool operator==(const ExceptionRaised&) const = default;
};
struct BreakpointNotHit {
    std::string file;
    int line = 0;
    bool operator==(const BreakpointNotHit&) const = default;
};
struct ExperimentError {
    std::string message;
    bool operator==(const ExperimentError&) const = default;
};
struct Timeout {
    int seconds = 0;
    bool operator==(const Timeout&) const = default;
};
/// Model-generated text standing in for an execution (debugger ablation).
struct Hallucinated {
    std::string text;
    bool operator==(const Hallucinated&) const = default;
};

}  // namespace observed

using ObservationDetail =
    std::variant<observed::SingleValue, observed::LoopValues, observed::NoException, observed::ExceptionRaised,
                 observed::BreakpointNotHit, observed::ExperimentError, observed::Timeout, observed::Hallucinated>;

/// The exact text placed after `Observation:` in the prompt. Pure function of the detail.
std::string render_observation(const ObservationDetail& detail);

struct Observation {
    ObservationDetail detail;
    bool grounded = true;

    std::string rendered() const { return render_observation(detail); }
    bool is_experiment_error() const { return std::holds_alternative<observed::ExperimentError>(detail); }

    bool operator==(const Observation&) const = default;
};

}  // namespace autosd
