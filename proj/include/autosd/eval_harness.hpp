#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "autosd/debug_driver.hpp"
#include "autosd/trace_model.hpp"

namespace autosd {

/// Applies the patch to a fresh snapshot and runs the full suite. Updates
/// evaluation, needs_manual_review and evaluation_note in place.
PatchEvaluation evaluate_patch(const BugContext& bug, PatchCandidate& patch, ExecutionAdapter& adapter,
                               std::chrono::seconds timeout);

struct MeanStd {
    double mean = 0;
    double stddev = 0;  // sample standard deviation; 0 for fewer than two samples
    std::size_t n = 0;
};

MeanStd mean_stddev(const std::vector<double>& samples);

/// "85.77 ± 4.20"
std::string format_mean_std(const MeanStd& m, int decimals = 2);

struct PartitionStats {
    int attempts = 0;
    int plausible = 0;

    /// plausible / attempts, or nullopt with no attempts.
    std::optional<double> precision() const;
};

struct BugOutcome {
    std::string bug_id;
    int attempts = 0;
    int plausible = 0;
    int confident = 0;
    int no_patch = 0;
    bool fixed = false;  // any attempt plausible
};

struct ModeSummary {
    std::vector<BugOutcome> bugs;  // sorted by id
    int bugs_fixed = 0;
    PartitionStats total;
    PartitionStats confident;
    PartitionStats not_confident;
};

struct AggregateReport {
    int benchmark_size = 0;
    ModeSummary grounded;
    std::optional<ModeSummary> ablated;  // present when any session ran with the debugger ablated
};

/// benchmark_size defaults to the number of distinct bug ids seen.
AggregateReport aggregate(const std::vector<RepairSession>& sessions, std::optional<int> benchmark_size = std::nullopt);

std::string render_aggregate_table(const AggregateReport& report);
std::string aggregate_to_json(const AggregateReport& report);

}  // namespace autosd
