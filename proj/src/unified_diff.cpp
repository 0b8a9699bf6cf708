#include "autosd/unified_diff.hpp"

#include <algorithm>
#include <vector>

namespace autosd {

namespace {

// Each element keeps its terminating newline, so a missing final newline is a difference.
std::vector<std::string_view> raw_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::size_t end = nl == std::string_view::npos ? text.size() : nl + 1;
        out.push_back(text.substr(pos, end - pos));
        pos = end;
    }
    return out;
}

enum class Op { Equal, Delete, Insert };

struct Step {
    Op op;
    std::size_t a;  // index into old (Equal, Delete)
    std::size_t b;  // index into new (Equal, Insert)
};

std::vector<Step> edit_script(const std::vector<std::string_view>& a, const std::vector<std::string_view>& b) {
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix])
        ++suffix;

    std::vector<Step> steps;
    for (std::size_t i = 0; i < prefix; ++i) steps.push_back({Op::Equal, i, i});

    const std::size_t n = a.size() - prefix - suffix;
    const std::size_t m = b.size() - prefix - suffix;
    if (n * m <= 25'000'000) {
        // LCS table over the differing middle.
        std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
        for (std::size_t i = n; i-- > 0;)
            for (std::size_t j = m; j-- > 0;)
                lcs[i][j] = a[prefix + i] == b[prefix + j] ? lcs[i + 1][j + 1] + 1
                                                           : std::max(lcs[i + 1][j], lcs[i][j + 1]);
        std::size_t i = 0, j = 0;
        while (i < n || j < m) {
            if (i < n && j < m && a[prefix + i] == b[prefix + j]) {
                steps.push_back({Op::Equal, prefix + i, prefix + j});
                ++i;
                ++j;
            } else if (j < m && (i == n || lcs[i][j + 1] > lcs[i + 1][j])) {
                steps.push_back({Op::Insert, 0, prefix + j});
                ++j;
            } else {
                steps.push_back({Op::Delete, prefix + i, 0});
                ++i;
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) steps.push_back({Op::Delete, prefix + i, 0});
        for (std::size_t j = 0; j < m; ++j) steps.push_back({Op::Insert, 0, prefix + j});
    }
    for (std::size_t k = 0; k < suffix; ++k)
        steps.push_back({Op::Equal, a.size() - suffix + k, b.size() - suffix + k});
    return steps;
}

void emit_line(std::string& out, char prefix, std::string_view line) {
    out += prefix;
    out += line;
    if (line.empty() || line.back() != '\n') out += "\n\\ No newline at end of file\n";
}

std::string range(std::size_t start, std::size_t len) {
    // GNU convention: an empty range names the line before it.
    std::size_t first = len == 0 ? start : start + 1;
    if (len == 1) return std::to_string(first);
    return std::to_string(first) + "," + std::to_string(len);
}

}  // namespace

std::string unified_diff(std::string_view old_text, std::string_view new_text, const std::string& path,
                         int context) {
    if (old_text == new_text) return {};
    const auto a = raw_lines(old_text);
    const auto b = raw_lines(new_text);
    const auto steps = edit_script(a, b);

    std::string out = "--- a/" + path + "\n+++ b/" + path + "\n";
    const std::size_t ctx = std::size_t(std::max(context, 0));
    std::size_t k = 0;
    while (k < steps.size()) {
        while (k < steps.size() && steps[k].op == Op::Equal) ++k;
        if (k == steps.size()) break;
        std::size_t hunk_begin = k >= ctx ? k - ctx : 0;
        // Extend while the gap between changes is at most 2*ctx equal lines.
        std::size_t end = k;
        while (true) {
            while (end < steps.size() && steps[end].op != Op::Equal) ++end;
            std::size_t eq = end;
            while (eq < steps.size() && steps[eq].op == Op::Equal) ++eq;
            if (eq < steps.size() && eq - end <= 2 * ctx) {
                end = eq;
                continue;
            }
            end = std::min(end + ctx, eq);
            break;
        }

        std::size_t a_start = 0, b_start = 0, a_len = 0, b_len = 0;
        bool a_set = false, b_set = false;
        for (std::size_t s = hunk_begin; s < end; ++s) {
            const auto& st = steps[s];
            if (st.op != Op::Insert) {
                if (!a_set) a_start = st.a, a_set = true;
                ++a_len;
            }
            if (st.op != Op::Delete) {
                if (!b_set) b_start = st.b, b_set = true;
                ++b_len;
            }
        }
        // Empty sides anchor at the position of the neighbouring line.
        if (!a_set) {
            std::size_t before = 0;
            for (std::size_t s = 0; s < hunk_begin; ++s)
                if (steps[s].op != Op::Insert) ++before;
            a_start = before;
        }
        if (!b_set) {
            std::size_t before = 0;
            for (std::size_t s = 0; s < hunk_begin; ++s)
                if (steps[s].op != Op::Delete) ++before;
            b_start = before;
        }
        out += "@@ -" + range(a_start, a_len) + " +" + range(b_start, b_len) + " @@\n";
        for (std::size_t s = hunk_begin; s < end; ++s) {
            const auto& st = steps[s];
            switch (st.op) {
                case Op::Equal: emit_line(out, ' ', a[st.a]); break;
                case Op::Delete: emit_line(out, '-', a[st.a]); break;
                case Op::Insert: emit_line(out, '+', b[st.b]); break;
            }
        }
        k = end;
    }
    return out;
}

}  // namespace autosd
