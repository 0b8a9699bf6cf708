#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "autosd/debug_driver.hpp"
#include "autosd/eval_harness.hpp"
#include "autosd/trace_model.hpp"

namespace autosd {

enum class MutatorKind { IntLiteral, IfRemover, StrLiteral, OperatorChanger, BinOpRemover, AugAssign, IfNegator };

inline constexpr MutatorKind kAllMutators[] = {MutatorKind::IntLiteral,      MutatorKind::IfRemover,
                                               MutatorKind::StrLiteral,      MutatorKind::OperatorChanger,
                                               MutatorKind::BinOpRemover,    MutatorKind::AugAssign,
                                               MutatorKind::IfNegator};

std::string_view to_string(MutatorKind k);
MutatorKind parse_mutator_kind(std::string_view name);

struct TextEdit {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string replacement;

    std::string apply(std::string_view source) const;
    bool operator==(const TextEdit&) const = default;
};

struct MutationSite {
    std::string file;
    std::size_t begin = 0;  // byte span of the mutated node
    std::size_t end = 0;
    int line = 0;

    bool operator==(const MutationSite&) const = default;
};

struct MutationSpec {
    MutatorKind mutator = MutatorKind::IntLiteral;
    MutationSite site;
    std::string detail;  // e.g. "0->1", "lower", "keep-left", "then@0"
    TextEdit edit;

    std::string apply(std::string_view source) const { return edit.apply(source); }
    bool operator==(const MutationSpec&) const = default;
};

/// All mutation sites in `source`, restricted to the given lines when a span is passed.
/// Throws py::ParseError when the source does not parse.
std::vector<MutationSpec> enumerate_mutants(const std::string& source, const std::string& file = "",
                                            std::optional<LineSpan> lines = std::nullopt);

/// Inverse applications available to the template baseline: literal and
/// operator swaps, re-casing strings, and stripping a `not` from if-conditions.
std::vector<MutationSpec> enumerate_inverse_mutants(const std::string& source, const std::string& file = "",
                                                    std::optional<LineSpan> lines = std::nullopt);

/// Rule-based reversibility of a mutation (original -> mutated).
bool classify_reversible(const MutationSpec& spec, const std::string& original, const std::string& mutated);

/// Brute force: some single inverse application on `mutated` restores `original` byte for byte.
bool oracle_reversible(const std::string& original, const std::string& mutated, std::optional<LineSpan> lines);

// ---- corpus ----------------------------------------------------------------

struct CorpusEntry {
    std::string id;
    std::filesystem::path dir;  // absolute
    std::string source_file;    // relative to dir
    std::string function;
    std::vector<std::string> tests;
    std::string test_command;  // "{test}" is replaced by a test id

    std::string command_for(const std::string& test) const;
};

/// Reads <dir>/corpus.json.
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& dir);

class CorpusTestFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BenchmarkEntry {
    std::string id;
    std::string corpus_id;
    std::filesystem::path corpus_dir;
    std::string source_file;
    std::string function;
    std::string original_source;
    std::string mutated_source;
    std::string failing_test_id;
    std::vector<std::string> tests;
    std::string test_command;
    MutationSpec spec;
    bool reversible = false;

    std::string command_for(const std::string& test) const;
};

struct BenchgenOptions {
    int max_per_function = 2;  // 0: no cap
    std::set<MutatorKind> enabled{std::begin(kAllMutators), std::end(kAllMutators)};
    std::chrono::seconds timeout{10};
    int jobs = 0;  // 0: hardware threads
};

/// Per-test outcome of running the suite of an entry against `source`.
std::map<std::string, TestResult> run_suite(const CorpusEntry& entry, const std::string& source,
                                            ExecutionAdapter& adapter, std::chrono::seconds timeout,
                                            int stop_after_failures = 0);

std::vector<BenchmarkEntry> generate_benchmark(const std::vector<CorpusEntry>& corpus, std::uint64_t seed,
                                               int target_size, ExecutionAdapter& adapter,
                                               const BenchgenOptions& options = {});

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// Deterministic Fisher-Yates driven by mt19937_64 (no std distributions, so
/// the order is the same with every standard library).
template <class T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t r;
        do r = rng();
        while (r >= limit);
        std::swap(items[i - 1], items[std::size_t(r % bound)]);
    }
}

// ---- manifest --------------------------------------------------------------

std::string manifest_to_json(const std::vector<BenchmarkEntry>& entries, std::uint64_t seed);
std::vector<BenchmarkEntry> load_manifest(const std::filesystem::path& file);

/// The bug context for an entry materialized under `project_dir` (mutated source plus tests).
BugContext materialize_entry(const BenchmarkEntry& entry, const std::filesystem::path& project_dir);

/// Writes manifest.json, bugs/<id>/ projects and bugs/<id>.json bug configs.
void write_benchmark(const std::vector<BenchmarkEntry>& entries, std::uint64_t seed, const std::filesystem::path& out);

// ---- template baseline -----------------------------------------------------

/// Remembers whether a test passes for (entry, source fingerprint).
class TestCache {
public:
    std::optional<bool> get(const std::string& key) const;
    void put(const std::string& key, bool passed);
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, bool> passed_;
};

struct BaselineOutcome {
    bool fixed = false;              // the originally failing test passes
    bool exact_restoration = false;  // the fixing candidate restored the original source
    int tried = 0;
};

BaselineOutcome reverse_template_baseline(const BenchmarkEntry& entry, int attempts, std::uint64_t seed,
                                          ExecutionAdapter& adapter, TestCache& cache,
                                          std::chrono::seconds timeout = std::chrono::seconds(10));

struct BaselineRun {
    int fixed = 0;
    int exact = 0;
    int coincidental = 0;  // fixed without restoring the original
    int reversible_fixed = 0;
    std::map<MutatorKind, int> fixed_by_mutator;
    std::map<MutatorKind, int> exact_by_mutator;
};

struct BaselineReport {
    int entries = 0;
    int reversible_entries = 0;
    int ground_truth_fixed = 0;  // entries whose original source passes every test
    std::vector<BaselineRun> runs;
    MeanStd fixed;
    MeanStd exact;
    MeanStd coincidental;
    MeanStd reversible_fixed;
    std::map<MutatorKind, MeanStd> fixed_by_mutator;
    std::map<MutatorKind, MeanStd> exact_by_mutator;
};

struct BaselineOptions {
    int attempts = 10;
    int reruns = 100;
    std::uint64_t seed = 0;
    std::chrono::seconds timeout{10};
};

BaselineReport run_baseline(const std::vector<BenchmarkEntry>& entries, const BaselineOptions& options,
                            ExecutionAdapter& adapter);

std::string baseline_to_json(const BaselineReport& report, const BaselineOptions& options);
std::string render_baseline_table(const BaselineReport& report);

}  // namespace autosd
