#include "autosd/benchgen.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <thread>

#include <json.hpp>

#include "autosd/patch_executor.hpp"
#include "autosd/pysource.hpp"
#include "autosd/text_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace autosd {

std::string_view to_string(MutatorKind k) {
    switch (k) {
        case MutatorKind::IntLiteral: return "IntLiteral";
        case MutatorKind::IfRemover: return "IfRemover";
        case MutatorKind::StrLiteral: return "StrLiteral";
        case MutatorKind::OperatorChanger: return "OperatorChanger";
        case MutatorKind::BinOpRemover: return "BinOpRemover";
        case MutatorKind::AugAssign: return "AugAssign";
        case MutatorKind::IfNegator: return "IfNegator";
    }
    return "?";
}

MutatorKind parse_mutator_kind(std::string_view name) {
    for (auto k : kAllMutators)
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown mutator: " + std::string(name));
}

std::string TextEdit::apply(std::string_view source) const {
    std::string out(source.substr(0, begin));
    out += replacement;
    out += source.substr(end);
    return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combination
    std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---- mutators --------------------------------------------------------------

namespace {

struct StringParts {
    std::size_t prefix = 0;  // length of the prefix letters
    std::size_t quote = 0;   // 1 or 3
    bool raw = false;
    bool formatted = false;
};

StringParts string_parts(std::string_view tok) {
    StringParts p;
    while (p.prefix < tok.size() && std::isalpha(static_cast<unsigned char>(tok[p.prefix]))) {
        char c = char(std::tolower(static_cast<unsigned char>(tok[p.prefix])));
        if (c == 'r') p.raw = true;
        if (c == 'f') p.formatted = true;
        ++p.prefix;
    }
    std::string_view rest = tok.substr(p.prefix);
    p.quote = rest.size() >= 6 && (rest.substr(0, 3) == "\"\"\"" || rest.substr(0, 3) == "'''") ? 3 : 1;
    return p;
}

/// Re-cases the letters of a string literal, leaving escape sequences alone.
std::string recase(std::string_view tok, bool upper) {
    auto p = string_parts(tok);
    std::string out(tok);
    const std::size_t begin = p.prefix + p.quote;
    const std::size_t end = tok.size() - p.quote;
    for (std::size_t i = begin; i < end; ++i) {
        if (out[i] == '\\') {
            ++i;  // keep the escaped character as written
            continue;
        }
        unsigned char c = static_cast<unsigned char>(out[i]);
        if (c < 0x80) out[i] = char(upper ? std::toupper(c) : std::tolower(c));
    }
    return out;
}

std::string emptied(std::string_view tok) {
    auto p = string_parts(tok);
    std::string q(tok.substr(p.prefix, p.quote));
    return std::string(tok.substr(0, p.prefix)) + q + q;
}

bool in_lines(const std::optional<LineSpan>& lines, int line) { return !lines || lines->contains(line); }

bool is_docstring(const py::Module& m, std::size_t i) {
    auto prev_ok = i == 0 || m.tokens[i - 1].kind == py::TokenKind::Newline ||
                   m.tokens[i - 1].kind == py::TokenKind::Indent || m.tokens[i - 1].kind == py::TokenKind::Dedent;
    std::size_t j = i;
    while (j < m.tokens.size() && m.tokens[j].kind == py::TokenKind::String) ++j;
    return prev_ok && j < m.tokens.size() && m.tokens[j].kind == py::TokenKind::Newline;
}

const std::map<std::string_view, std::string_view>& operator_swaps() {
    static const std::map<std::string_view, std::string_view> m = {
        {"+", "-"}, {"-", "+"}, {"*", "/"}, {"/", "*"}, {"<<", ">>"}, {">>", "<<"}};
    return m;
}

const std::map<std::string_view, std::string_view>& augassign_swaps() {
    static const std::map<std::string_view, std::string_view> m = {
        {"+=", "-="}, {"-=", "+="}, {"*=", "/="}, {"/=", "*="}, {"<<=", ">>="}, {">>=", "<<="}};
    return m;
}

struct Builder {
    const py::Module& m;
    const std::string& file;
    std::vector<MutationSpec> out;

    void add(MutatorKind k, std::size_t begin, std::size_t end, int line, std::string detail, TextEdit edit) {
        if (edit.apply(m.source) == m.source) return;
        MutationSpec s;
        s.mutator = k;
        s.site = {file, begin, end, line};
        s.detail = std::move(detail);
        s.edit = std::move(edit);
        out.push_back(std::move(s));
    }
    std::size_t ls(int line) const { return m.line_start(line); }
};

void int_literals(Builder& b, const std::optional<LineSpan>& lines) {
    for (const auto& t : b.m.tokens) {
        if (t.kind != py::TokenKind::Number || !in_lines(lines, t.line)) continue;
        auto text = b.m.text(t);
        if (text == "0" || text == "1") {
            std::string to = text == "0" ? "1" : "0";
            b.add(MutatorKind::IntLiteral, t.begin, t.end, t.line, std::string(text) + "->" + to, {t.begin, t.end, to});
        }
    }
}

void string_literals(Builder& b, const std::optional<LineSpan>& lines, bool with_empty) {
    for (std::size_t i = 0; i < b.m.tokens.size(); ++i) {
        const auto& t = b.m.tokens[i];
        if (t.kind != py::TokenKind::String || !in_lines(lines, t.line)) continue;
        auto text = b.m.text(t);
        if (string_parts(text).formatted || is_docstring(b.m, i)) continue;
        if (with_empty)
            b.add(MutatorKind::StrLiteral, t.begin, t.end, t.line, "empty", {t.begin, t.end, emptied(text)});
        b.add(MutatorKind::StrLiteral, t.begin, t.end, t.line, "lower", {t.begin, t.end, recase(text, false)});
        b.add(MutatorKind::StrLiteral, t.begin, t.end, t.line, "upper", {t.begin, t.end, recase(text, true)});
    }
}

void operators(Builder& b, const std::optional<LineSpan>& lines) {
    for (const auto& e : b.m.exprs) {
        if (e.kind != py::ExprKind::BinOp) continue;
        const auto& t = b.m.tokens[std::size_t(e.op_token)];
        if (!in_lines(lines, t.line)) continue;
        auto it = operator_swaps().find(b.m.text(t));
        if (it == operator_swaps().end()) continue;
        b.add(MutatorKind::OperatorChanger, t.begin, t.end, t.line, std::string(it->first) + "->" + std::string(it->second),
              {t.begin, t.end, std::string(it->second)});
    }
}

void augassign(Builder& b, const std::optional<LineSpan>& lines) {
    for (const auto& t : b.m.tokens) {
        if (t.kind != py::TokenKind::Op || !in_lines(lines, t.line)) continue;
        auto it = augassign_swaps().find(b.m.text(t));
        if (it == augassign_swaps().end()) continue;
        b.add(MutatorKind::AugAssign, t.begin, t.end, t.line, std::string(it->first) + "->" + std::string(it->second),
              {t.begin, t.end, std::string(it->second)});
    }
}

void binop_removal(Builder& b, const std::optional<LineSpan>& lines) {
    for (const auto& e : b.m.exprs) {
        if (e.kind != py::ExprKind::BinOp || !in_lines(lines, e.line)) continue;
        const auto& l = b.m.exprs[std::size_t(e.left)];
        const auto& r = b.m.exprs[std::size_t(e.right)];
        b.add(MutatorKind::BinOpRemover, e.begin, e.end, e.line, "keep-left",
              {e.begin, e.end, std::string(b.m.text(l.begin, l.end))});
        b.add(MutatorKind::BinOpRemover, e.begin, e.end, e.line, "keep-right",
              {e.begin, e.end, std::string(b.m.text(r.begin, r.end))});
    }
}

void if_removal(Builder& b, const std::optional<LineSpan>& lines) {
    for (const auto& st : b.m.ifs) {
        if (!in_lines(lines, st.first_line)) continue;
        const std::size_t stmt_begin = b.ls(st.first_line);
        const std::size_t stmt_end = b.ls(st.last_line + 1);
        for (std::size_t i = 0; i < st.clauses.size(); ++i) {
            const auto& c = st.clauses[i];
            const std::size_t cb = b.ls(c.line);
            if (c.keyword == "else") {
                b.add(MutatorKind::IfRemover, cb, stmt_end, c.line, "else", {cb, stmt_end, ""});
                continue;
            }
            const bool has_successor = i + 1 < st.clauses.size();
            const std::string detail = "then@" + std::to_string(i);
            if (has_successor) {
                if (c.inline_body) {
                    b.add(MutatorKind::IfRemover, c.inline_begin, c.inline_end, c.line, detail,
                          {c.inline_begin, c.inline_end, "pass"});
                } else {
                    std::size_t body_begin = b.ls(c.body_first_line);
                    std::size_t body_end = b.ls(c.body_last_line + 1);
                    b.add(MutatorKind::IfRemover, body_begin, body_end, c.line, detail,
                          {body_begin, body_end, c.body_indent + "pass\n"});
                }
            } else if (i == 0) {
                // Nothing else would remain: drop the statement.
                std::string repl = st.block_size == 1 ? st.indent + "pass\n" : "";
                b.add(MutatorKind::IfRemover, stmt_begin, stmt_end, st.first_line, detail, {stmt_begin, stmt_end, repl});
            } else {
                b.add(MutatorKind::IfRemover, cb, stmt_end, c.line, detail, {cb, stmt_end, ""});
            }
        }
    }
}

void if_negation(Builder& b, const std::optional<LineSpan>& lines) {
    for (const auto& st : b.m.ifs) {
        for (std::size_t i = 0; i < st.clauses.size(); ++i) {
            const auto& c = st.clauses[i];
            if (c.condition < 0 || !in_lines(lines, c.line)) continue;
            const auto& e = b.m.exprs[std::size_t(c.condition)];
            std::string text(b.m.text(e.begin, e.end));
            std::string repl = e.kind == py::ExprKind::Group ? "not " + text : "not (" + text + ")";
            b.add(MutatorKind::IfNegator, e.begin, e.end, c.line, "negate@" + std::to_string(i), {e.begin, e.end, repl});
        }
    }
}

void if_unnegation(Builder& b, const std::optional<LineSpan>& lines) {
    for (const auto& st : b.m.ifs) {
        for (const auto& c : st.clauses) {
            if (c.condition < 0 || !in_lines(lines, c.line)) continue;
            const auto& e = b.m.exprs[std::size_t(c.condition)];
            if (e.kind != py::ExprKind::Not) continue;
            const auto& operand = b.m.exprs[std::size_t(e.left)];
            b.add(MutatorKind::IfNegator, e.begin, e.end, c.line, "unnegate",
                  {e.begin, e.end, std::string(b.m.text(operand.begin, operand.end))});
            if (operand.kind == py::ExprKind::Group && operand.left >= 0) {
                const auto& inner = b.m.exprs[std::size_t(operand.left)];
                b.add(MutatorKind::IfNegator, e.begin, e.end, c.line, "unnegate-unwrap",
                      {e.begin, e.end, std::string(b.m.text(inner.begin, inner.end))});
            }
        }
    }
}

}  // namespace

std::vector<MutationSpec> enumerate_mutants(const std::string& source, const std::string& file,
                                            std::optional<LineSpan> lines) {
    auto module = py::parse_module(source);
    Builder b{module, file, {}};
    int_literals(b, lines);
    if_removal(b, lines);
    string_literals(b, lines, true);
    operators(b, lines);
    binop_removal(b, lines);
    augassign(b, lines);
    if_negation(b, lines);
    return b.out;
}

std::vector<MutationSpec> enumerate_inverse_mutants(const std::string& source, const std::string& file,
                                                    std::optional<LineSpan> lines) {
    auto module = py::parse_module(source);
    Builder b{module, file, {}};
    int_literals(b, lines);
    string_literals(b, lines, false);
    operators(b, lines);
    augassign(b, lines);
    if_unnegation(b, lines);
    return b.out;
}

bool classify_reversible(const MutationSpec& spec, const std::string& original, const std::string& mutated) {
    switch (spec.mutator) {
        case MutatorKind::IfRemover:
        case MutatorKind::BinOpRemover: return false;
        case MutatorKind::StrLiteral: {
            if (spec.detail == "empty") return false;
            // Casing keeps byte offsets, so the site is unchanged in the mutant.
            const bool upper = spec.detail == "lower";
            std::string_view tok = std::string_view(mutated).substr(spec.site.begin, spec.site.end - spec.site.begin);
            TextEdit inverse{spec.site.begin, spec.site.end, recase(tok, upper)};
            return inverse.apply(mutated) == original;
        }
        default: return true;
    }
}

bool oracle_reversible(const std::string& original, const std::string& mutated, std::optional<LineSpan> lines) {
    for (const auto& inv : enumerate_inverse_mutants(mutated, "", lines))
        if (inv.apply(mutated) == original) return true;
    return false;
}

// ---- corpus ----------------------------------------------------------------

namespace {

std::string substitute_test(const std::string& command, const std::string& test) {
    std::string out = command;
    for (auto pos = out.find("{test}"); pos != std::string::npos; pos = out.find("{test}", pos + test.size()))
        out.replace(pos, 6, test);
    return out;
}

std::optional<LineSpan> function_span(const std::string& source, const std::string& function) {
    auto module = py::parse_module(source);
    const auto* fn = module.find_function(function);
    if (!fn) return std::nullopt;
    return LineSpan{fn->first_line, fn->last_line};
}

}  // namespace

std::string CorpusEntry::command_for(const std::string& test) const { return substitute_test(test_command, test); }
std::string BenchmarkEntry::command_for(const std::string& test) const { return substitute_test(test_command, test); }

std::vector<CorpusEntry> load_corpus(const fs::path& dir) {
    const auto file = dir / "corpus.json";
    json doc;
    try {
        doc = json::parse(read_file(file.string()));
    } catch (const json::exception& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "autosd-corpus/1") throw std::runtime_error(file.string() + ": expected format autosd-corpus/1");
    std::vector<CorpusEntry> out;
    for (const auto& e : doc.at("entries")) {
        CorpusEntry c;
        c.id = e.at("id").get<std::string>();
        c.dir = fs::absolute(dir / e.at("dir").get<std::string>());
        c.source_file = e.value("source", "solution.py");
        c.function = e.at("function").get<std::string>();
        c.tests = e.at("tests").get<std::vector<std::string>>();
        c.test_command = e.at("test_command").get<std::string>();
        if (c.tests.empty()) throw std::runtime_error("corpus entry " + c.id + " has no tests");
        out.push_back(std::move(c));
    }
    return out;
}

std::map<std::string, TestResult> run_suite(const CorpusEntry& entry, const std::string& source,
                                            ExecutionAdapter& adapter, std::chrono::seconds timeout,
                                            int stop_after_failures) {
    auto snapshot = ProjectSnapshot::create(entry.dir);
    snapshot.write(entry.source_file, source);
    std::map<std::string, TestResult> results;
    int failures = 0;
    for (const auto& test : entry.tests) {
        auto r = adapter.run_test(snapshot.root(), entry.command_for(test), timeout);
        if (!r.passed()) ++failures;
        results[test] = std::move(r);
        if (stop_after_failures > 0 && failures >= stop_after_failures) break;
    }
    return results;
}

namespace {

template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    int workers = jobs > 0 ? jobs : int(std::max(1u, std::thread::hardware_concurrency()));
    workers = int(std::min<std::size_t>(std::size_t(workers), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex mu;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<BenchmarkEntry> generate_benchmark(const std::vector<CorpusEntry>& corpus, std::uint64_t seed,
                                               int target_size, ExecutionAdapter& adapter,
                                               const BenchgenOptions& options) {
    std::vector<std::string> originals(corpus.size());
    std::vector<std::optional<LineSpan>> spans(corpus.size());
    parallel_for(corpus.size(), options.jobs, [&](std::size_t i) {
        const auto& c = corpus[i];
        originals[i] = read_file((c.dir / c.source_file).string());
        spans[i] = function_span(originals[i], c.function);
        if (!spans[i]) throw CorpusTestFailure("corpus entry " + c.id + ": function " + c.function + " not found");
        for (const auto& [test, r] : run_suite(c, originals[i], adapter, options.timeout))
            if (!r.passed())
                throw CorpusTestFailure("corpus entry " + c.id + ": test " + test + " fails on the original source");
    });

    struct Candidate {
        std::size_t corpus_index;
        MutationSpec spec;
    };
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < corpus.size(); ++i)
        for (auto& spec : enumerate_mutants(originals[i], corpus[i].source_file, spans[i]))
            if (options.enabled.count(spec.mutator)) candidates.push_back({i, std::move(spec)});
    seeded_shuffle(candidates, seed);

    std::vector<BenchmarkEntry> out;
    std::vector<int> per_function(corpus.size(), 0);
    const std::size_t batch = std::size_t(std::max(1, options.jobs > 0 ? options.jobs
                                                                       : int(std::thread::hardware_concurrency())));
    std::size_t pos = 0;
    while (pos < candidates.size() && int(out.size()) < target_size) {
        // Evaluate a batch in parallel, accept in candidate order; the result does not depend on the batch size.
        std::vector<std::size_t> picked;
        while (pos < candidates.size() && picked.size() < batch) {
            const auto ci = candidates[pos].corpus_index;
            if (options.max_per_function <= 0 || per_function[ci] < options.max_per_function) picked.push_back(pos);
            ++pos;
        }
        std::vector<std::optional<std::string>> failing(picked.size());
        parallel_for(picked.size(), options.jobs, [&](std::size_t k) {
            const auto& cand = candidates[picked[k]];
            const auto& entry = corpus[cand.corpus_index];
            std::string mutated = cand.spec.apply(originals[cand.corpus_index]);
            if (!py::syntax_error(mutated).empty()) return;
            auto results = run_suite(entry, mutated, adapter, options.timeout, 2);
            std::vector<std::string> failed;
            for (const auto& [test, r] : results)
                if (!r.passed()) failed.push_back(test);
            if (failed.size() == 1) failing[k] = failed.front();
        });
        for (std::size_t k = 0; k < picked.size() && int(out.size()) < target_size; ++k) {
            if (!failing[k]) continue;
            const auto& cand = candidates[picked[k]];
            const auto ci = cand.corpus_index;
            if (options.max_per_function > 0 && per_function[ci] >= options.max_per_function) continue;
            const auto& c = corpus[ci];
            BenchmarkEntry e;
            e.id = c.id + "-" + to_lower(to_string(cand.spec.mutator)) + "-" + std::to_string(per_function[ci] + 1);
            e.corpus_id = c.id;
            e.corpus_dir = c.dir;
            e.source_file = c.source_file;
            e.function = c.function;
            e.original_source = originals[ci];
            e.mutated_source = cand.spec.apply(originals[ci]);
            e.failing_test_id = *failing[k];
            e.tests = c.tests;
            e.test_command = c.test_command;
            e.spec = cand.spec;
            e.reversible = classify_reversible(cand.spec, e.original_source, e.mutated_source);
            ++per_function[ci];
            out.push_back(std::move(e));
        }
    }
    return out;
}

// ---- manifest --------------------------------------------------------------

namespace {

json spec_json(const MutationSpec& s) {
    return json{{"mutator", std::string(to_string(s.mutator))},
                {"detail", s.detail},
                {"site", {{"file", s.site.file}, {"begin", s.site.begin}, {"end", s.site.end}, {"line", s.site.line}}},
                {"edit", {{"begin", s.edit.begin}, {"end", s.edit.end}, {"replacement", s.edit.replacement}}}};
}

MutationSpec spec_from_json(const json& j) {
    MutationSpec s;
    s.mutator = parse_mutator_kind(j.at("mutator").get<std::string>());
    s.detail = j.at("detail").get<std::string>();
    const auto& site = j.at("site");
    s.site = {site.at("file").get<std::string>(), site.at("begin").get<std::size_t>(), site.at("end").get<std::size_t>(),
              site.at("line").get<int>()};
    const auto& edit = j.at("edit");
    s.edit = {edit.at("begin").get<std::size_t>(), edit.at("end").get<std::size_t>(),
              edit.at("replacement").get<std::string>()};
    return s;
}

std::optional<std::string> find_test_source(const fs::path& dir, const std::string& test) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".py") continue;
        if (e.path().filename().string().rfind("test", 0) == 0) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            auto src = read_file(f.string());
            auto module = py::parse_module(src);
            if (const auto* fn = module.find_function(test)) {
                auto lines = split_lines(src);
                std::vector<std::string> body(lines.begin() + (fn->first_line - 1), lines.begin() + fn->last_line);
                return join_lines(body);
            }
        } catch (const py::ParseError&) {
        }
    }
    return std::nullopt;
}

void copy_project(const fs::path& from, const fs::path& to) {
    fs::create_directories(to);
    for (const auto& entry : fs::directory_iterator(from)) {
        auto name = entry.path().filename();
        if (entry.is_directory()) {
            if (name != "__pycache__") copy_project(entry.path(), to / name);
        } else if (entry.is_regular_file()) {
            fs::copy_file(entry.path(), to / name, fs::copy_options::overwrite_existing);
        }
    }
}

json bug_json(const BugContext& bug, const fs::path& base) {
    json j;
    j["id"] = bug.id;
    j["project_root"] = bug.project_root.lexically_relative(base).generic_string();
    j["buggy_file"] = bug.buggy_file.generic_string();
    j["method_span"] = {bug.method_span.start, bug.method_span.end};
    j["failing_test_command"] = bug.failing_test_command;
    j["suite_commands"] = bug.suite_commands;
    if (bug.failing_test_source) j["failing_test_source"] = *bug.failing_test_source;
    j["language"] = std::string(to_string(bug.language));
    return j;
}

}  // namespace

std::string manifest_to_json(const std::vector<BenchmarkEntry>& entries, std::uint64_t seed) {
    json doc;
    doc["format"] = "autosd-benchmark/1";
    doc["seed"] = seed;
    doc["entries"] = json::array();
    for (const auto& e : entries) {
        json j;
        j["id"] = e.id;
        j["corpus_id"] = e.corpus_id;
        j["project"] = "bugs/" + e.id;
        j["bug_config"] = "bugs/" + e.id + ".json";
        j["source_file"] = e.source_file;
        j["function"] = e.function;
        j["failing_test"] = e.failing_test_id;
        j["tests"] = e.tests;
        j["test_command"] = e.test_command;
        j["mutation"] = spec_json(e.spec);
        j["reversible"] = e.reversible;
        j["original_source"] = e.original_source;
        j["mutated_source"] = e.mutated_source;
        doc["entries"].push_back(std::move(j));
    }
    return doc.dump(2) + "\n";
}

std::vector<BenchmarkEntry> load_manifest(const fs::path& file) {
    json doc;
    try {
        doc = json::parse(read_file(file.string()));
    } catch (const json::exception& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "autosd-benchmark/1")
        throw std::runtime_error(file.string() + ": expected format autosd-benchmark/1");
    const auto base = fs::absolute(file).parent_path();
    std::vector<BenchmarkEntry> out;
    for (const auto& j : doc.at("entries")) {
        BenchmarkEntry e;
        e.id = j.at("id").get<std::string>();
        e.corpus_id = j.at("corpus_id").get<std::string>();
        e.corpus_dir = base / j.at("project").get<std::string>();
        e.source_file = j.at("source_file").get<std::string>();
        e.function = j.at("function").get<std::string>();
        e.failing_test_id = j.at("failing_test").get<std::string>();
        e.tests = j.at("tests").get<std::vector<std::string>>();
        e.test_command = j.at("test_command").get<std::string>();
        e.spec = spec_from_json(j.at("mutation"));
        e.reversible = j.at("reversible").get<bool>();
        e.original_source = j.at("original_source").get<std::string>();
        e.mutated_source = j.at("mutated_source").get<std::string>();
        out.push_back(std::move(e));
    }
    return out;
}

BugContext materialize_entry(const BenchmarkEntry& entry, const fs::path& project_dir) {
    if (fs::absolute(entry.corpus_dir) != fs::absolute(project_dir)) copy_project(entry.corpus_dir, project_dir);
    write_file((project_dir / entry.source_file).string(), entry.mutated_source);
    auto span = function_span(entry.mutated_source, entry.function);
    if (!span) throw std::runtime_error("function " + entry.function + " not found in mutant " + entry.id);
    auto lines = split_lines(entry.mutated_source);
    BugContext bug;
    bug.id = entry.id;
    bug.project_root = fs::absolute(project_dir);
    bug.buggy_file = entry.source_file;
    bug.method_span = *span;
    bug.method_source = join_lines({lines.begin() + (span->start - 1), lines.begin() + span->end});
    bug.failing_test_command = entry.command_for(entry.failing_test_id);
    for (const auto& t : entry.tests) bug.suite_commands.push_back(entry.command_for(t));
    bug.failing_test_source = find_test_source(project_dir, entry.failing_test_id);
    return bug;
}

void write_benchmark(const std::vector<BenchmarkEntry>& entries, std::uint64_t seed, const fs::path& out) {
    fs::create_directories(out / "bugs");
    for (const auto& e : entries) {
        auto project = out / "bugs" / e.id;
        auto bug = materialize_entry(e, project);
        write_file((out / "bugs" / (e.id + ".json")).string(), bug_json(bug, fs::absolute(out / "bugs")).dump(2) + "\n");
    }
    write_file((out / "manifest.json").string(), manifest_to_json(entries, seed));
}

// ---- template baseline -----------------------------------------------------

std::optional<bool> TestCache::get(const std::string& key) const {
    std::lock_guard lock(mu_);
    auto it = passed_.find(key);
    if (it == passed_.end()) return std::nullopt;
    return it->second;
}

void TestCache::put(const std::string& key, bool passed) {
    std::lock_guard lock(mu_);
    passed_[key] = passed;
}

std::size_t TestCache::size() const {
    std::lock_guard lock(mu_);
    return passed_.size();
}

namespace {

CorpusEntry as_corpus_entry(const BenchmarkEntry& e) {
    return CorpusEntry{e.corpus_id, e.corpus_dir, e.source_file, e.function, e.tests, e.test_command};
}

bool passes_test(const BenchmarkEntry& entry, const std::string& source, const std::string& test,
                 ExecutionAdapter& adapter, TestCache& cache, std::chrono::seconds timeout) {
    const std::string key = entry.id + "|" + test + "|" + fingerprint(source);
    if (auto hit = cache.get(key)) return *hit;
    auto snapshot = ProjectSnapshot::create(entry.corpus_dir);
    snapshot.write(entry.source_file, source);
    bool ok = adapter.run_test(snapshot.root(), entry.command_for(test), timeout).passed();
    cache.put(key, ok);
    return ok;
}

std::uint64_t id_hash(const std::string& id) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : id) h = (h ^ c) * 1099511628211ull;
    return h;
}

}  // namespace

BaselineOutcome reverse_template_baseline(const BenchmarkEntry& entry, int attempts, std::uint64_t seed,
                                          ExecutionAdapter& adapter, TestCache& cache, std::chrono::seconds timeout) {
    BaselineOutcome outcome;
    auto span = function_span(entry.mutated_source, entry.function);
    auto candidates = enumerate_inverse_mutants(entry.mutated_source, entry.source_file, span);
    seeded_shuffle(candidates, seed);
    const std::size_t n = std::min(candidates.size(), std::size_t(std::max(0, attempts)));
    for (std::size_t i = 0; i < n; ++i) {
        std::string patched = candidates[i].apply(entry.mutated_source);
        ++outcome.tried;
        if (passes_test(entry, patched, entry.failing_test_id, adapter, cache, timeout)) {
            outcome.fixed = true;
            outcome.exact_restoration = patched == entry.original_source;
            break;
        }
    }
    return outcome;
}

BaselineReport run_baseline(const std::vector<BenchmarkEntry>& entries, const BaselineOptions& options,
                            ExecutionAdapter& adapter) {
    BaselineReport report;
    report.entries = int(entries.size());
    TestCache cache;
    for (const auto& e : entries) {
        if (e.reversible) ++report.reversible_entries;
        bool all = true;
        for (const auto& [test, r] : run_suite(as_corpus_entry(e), e.original_source, adapter, options.timeout))
            all = all && r.passed();
        if (all) ++report.ground_truth_fixed;
    }

    std::vector<double> fixed, exact, coincidental, reversible_fixed;
    std::map<MutatorKind, std::vector<double>> by_fixed, by_exact;
    for (int r = 0; r < options.reruns; ++r) {
        const std::uint64_t run_seed = mix_seed(options.seed, std::uint64_t(r));
        BaselineRun run;
        for (auto k : kAllMutators) run.fixed_by_mutator[k] = run.exact_by_mutator[k] = 0;
        for (const auto& e : entries) {
            auto o = reverse_template_baseline(e, options.attempts, mix_seed(run_seed, id_hash(e.id)), adapter, cache,
                                               options.timeout);
            if (!o.fixed) continue;
            ++run.fixed;
            ++run.fixed_by_mutator[e.spec.mutator];
            if (e.reversible) ++run.reversible_fixed;
            if (o.exact_restoration) {
                ++run.exact;
                ++run.exact_by_mutator[e.spec.mutator];
            } else {
                ++run.coincidental;
            }
        }
        fixed.push_back(run.fixed);
        exact.push_back(run.exact);
        coincidental.push_back(run.coincidental);
        reversible_fixed.push_back(run.reversible_fixed);
        for (auto k : kAllMutators) {
            by_fixed[k].push_back(run.fixed_by_mutator[k]);
            by_exact[k].push_back(run.exact_by_mutator[k]);
        }
        report.runs.push_back(std::move(run));
    }
    report.fixed = mean_stddev(fixed);
    report.exact = mean_stddev(exact);
    report.coincidental = mean_stddev(coincidental);
    report.reversible_fixed = mean_stddev(reversible_fixed);
    for (auto k : kAllMutators) {
        report.fixed_by_mutator[k] = mean_stddev(by_fixed[k]);
        report.exact_by_mutator[k] = mean_stddev(by_exact[k]);
    }
    return report;
}

std::string baseline_to_json(const BaselineReport& report, const BaselineOptions& options) {
    auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"stddev", m.stddev}, {"n", m.n}}; };
    json j;
    j["format"] = "autosd-baseline/1";
    j["seed"] = options.seed;
    j["reruns"] = options.reruns;
    j["attempts"] = options.attempts;
    j["entries"] = report.entries;
    j["reversible_entries"] = report.reversible_entries;
    j["ground_truth_fixed"] = report.ground_truth_fixed;
    j["fixed"] = ms(report.fixed);
    j["exact_restoration"] = ms(report.exact);
    j["coincidental"] = ms(report.coincidental);
    j["reversible_fixed"] = ms(report.reversible_fixed);
    json per = json::object();
    for (auto k : kAllMutators)
        per[std::string(to_string(k))] = {{"fixed", ms(report.fixed_by_mutator.at(k))},
                                          {"exact_restoration", ms(report.exact_by_mutator.at(k))}};
    j["by_mutator"] = per;
    return j.dump(2) + "\n";
}

std::string render_baseline_table(const BaselineReport& report) {
    std::string out = "Template baseline over " + std::to_string(report.runs.size()) + " reruns, " +
                      std::to_string(report.entries) + " bugs (" + std::to_string(report.reversible_entries) +
                      " reversible)\n";
    out += "  ground truth restoration fixes: " + std::to_string(report.ground_truth_fixed) + "\n";
    out += "  fixed (failing test passes):    " + format_mean_std(report.fixed) + "\n";
    out += "  exact restorations:             " + format_mean_std(report.exact) + "\n";
    out += "  coincidental fixes:             " + format_mean_std(report.coincidental) + "\n";
    out += "  reversible bugs fixed:          " + format_mean_std(report.reversible_fixed) + "\n\n";
    out += "  mutator          fixed            exact\n";
    for (auto k : kAllMutators) {
        char line[160];
        std::snprintf(line, sizeof line, "  %-16s %-16s %s\n", std::string(to_string(k)).c_str(),
                      format_mean_std(report.fixed_by_mutator.at(k)).c_str(),
                      format_mean_std(report.exact_by_mutator.at(k)).c_str());
        out += line;
    }
    return out;
}

}  // namespace autosd
