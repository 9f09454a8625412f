#include "crim/metrics.hpp"

#include <algorithm>
#include <unordered_map>

#include "crim/errors.hpp"

namespace crim {
namespace {

constexpr std::string_view kStage = "measure";

// Decodes one code point starting at s[i]; invalid bytes decode as themselves
// (never whitespace) with length 1.
std::uint32_t decode_at(std::string_view s, std::size_t i, std::size_t& len) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t n = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : (c & 0xF8) == 0xF0 ? 4 : 0;
    if (n == 0 || i + n > s.size()) {
        len = 1;
        return c;
    }
    std::uint32_t cp = n == 1 ? c : n == 2 ? (c & 0x1F) : n == 3 ? (c & 0x0F) : (c & 0x07);
    for (std::size_t k = 1; k < n; ++k) {
        const auto cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) {
            len = 1;
            return c;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    len = n;
    return cp;
}

// Unicode White_Space property.
bool is_unicode_space(std::uint32_t cp) noexcept {
    return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 || cp == 0x1680 ||
           (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
           cp == 0x3000;
}

// Maps each distinct string to a small integer so the dynamic programs
// compare ints instead of strings.
class Interner {
public:
    int id(std::string_view s) {
        const auto [it, inserted] = ids_.emplace(s, static_cast<int>(ids_.size()));
        return it->second;
    }

private:
    std::unordered_map<std::string_view, int> ids_;
};

std::size_t edit_distance(std::span<const int> a, std::span<const int> b) {
    if (a.size() < b.size()) std::swap(a, b);
    // b is the shorter sequence; rows have |b| + 1 cells.
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

// Myers' greedy O((N+M)D) shortest edit script length, insertions and
// deletions only. Equals N + M - 2 * LCS(a, b).
std::size_t myers_distance(std::span<const int> a, std::span<const int> b) {
    while (!a.empty() && !b.empty() && a.front() == b.front()) {
        a = a.subspan(1);
        b = b.subspan(1);
    }
    while (!a.empty() && !b.empty() && a.back() == b.back()) {
        a = a.first(a.size() - 1);
        b = b.first(b.size() - 1);
    }
    const auto n = static_cast<std::ptrdiff_t>(a.size());
    const auto m = static_cast<std::ptrdiff_t>(b.size());
    if (n == 0 || m == 0) return static_cast<std::size_t>(n + m);

    const std::ptrdiff_t max_d = n + m;
    std::vector<std::ptrdiff_t> v(static_cast<std::size_t>(2 * max_d + 2), 0);
    const std::ptrdiff_t offset = max_d + 1;
    for (std::ptrdiff_t d = 0; d <= max_d; ++d) {
        for (std::ptrdiff_t k = -d; k <= d; k += 2) {
            std::ptrdiff_t x;
            if (k == -d || (k != d && v[offset + k - 1] < v[offset + k + 1])) {
                x = v[offset + k + 1];
            } else {
                x = v[offset + k - 1] + 1;
            }
            std::ptrdiff_t y = x - k;
            while (x < n && y < m && a[x] == b[y]) {
                ++x;
                ++y;
            }
            v[offset + k] = x;
            if (x >= n && y >= m) return static_cast<std::size_t>(d);
        }
    }
    return static_cast<std::size_t>(max_d);
}

bool is_ident_byte(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}

bool is_word_token(std::string_view tok) noexcept {
    return !tok.empty() && std::all_of(tok.begin(), tok.end(), [](char c) { return is_ident_byte(static_cast<unsigned char>(c)); });
}

template <typename Range>
std::vector<std::string_view> longest_first(const Range& items) {
    std::vector<std::string_view> out(items.begin(), items.end());
    std::stable_sort(out.begin(), out.end(), [](auto x, auto y) { return x.size() > y.size(); });
    return out;
}

}  // namespace

std::string_view metric_name(MetricKind kind) noexcept {
    switch (kind) {
        case MetricKind::LocDelta: return "loc";
        case MetricKind::LevenshteinWords: return "lev";
        case MetricKind::CyclomaticDelta: return "cc";
    }
    return "loc";
}

MetricKind parse_metric(std::string_view name) {
    if (name == "loc" || name == "LOC_DELTA") return MetricKind::LocDelta;
    if (name == "lev" || name == "LEVENSHTEIN_WORDS") return MetricKind::LevenshteinWords;
    if (name == "cc" || name == "CYCLOMATIC_DELTA") return MetricKind::CyclomaticDelta;
    throw InputError("config", "unknown metric '" + std::string(name) + "' (expected loc, lev or cc)");
}

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    std::size_t start = std::string_view::npos;
    while (i < text.size()) {
        std::size_t len = 1;
        const std::uint32_t cp = decode_at(text, i, len);
        if (is_unicode_space(cp)) {
            if (start != std::string_view::npos) {
                tokens.emplace_back(text.substr(start, i - start));
                start = std::string_view::npos;
            }
        } else if (start == std::string_view::npos) {
            start = i;
        }
        i += len;
    }
    if (start != std::string_view::npos) tokens.emplace_back(text.substr(start));
    return tokens;
}

std::size_t levenshtein_words(std::span<const std::string> a, std::span<const std::string> b) {
    Interner interner;
    std::vector<int> ia, ib;
    ia.reserve(a.size());
    ib.reserve(b.size());
    for (const auto& t : a) ia.push_back(interner.id(t));
    for (const auto& t : b) ib.push_back(interner.id(t));
    return edit_distance(ia, ib);
}

std::size_t line_diff_delta(std::string_view before, std::string_view after) {
    Interner interner;
    std::vector<int> ia, ib;
    for (auto line : split_lines(before)) ia.push_back(interner.id(line));
    for (auto line : split_lines(after)) ib.push_back(interner.id(line));
    return myers_distance(ia, ib);
}

std::size_t cyclomatic_complexity(std::string_view source, const LanguageProfile& profile) {
    if (!profile.supports_complexity()) {
        throw ComplexityUnavailable(std::string(kStage), "profile '" + profile.name + "' has no decision tokens");
    }
    std::vector<std::string_view> words, operators;
    for (const auto& t : profile.decision_tokens) (is_word_token(t) ? words : operators).push_back(t);
    operators = longest_first(operators);
    const auto line_comments = longest_first(profile.line_comments);
    const auto delimiters = longest_first(profile.string_delimiters);

    const auto starts_with = [&](std::size_t i, std::string_view tok) { return source.substr(i, tok.size()) == tok; };

    std::size_t decisions = 0;
    std::size_t i = 0;
    const std::size_t n = source.size();
    while (i < n) {
        bool skipped = false;
        for (const auto& bc : profile.block_comments) {
            if (starts_with(i, bc.open)) {
                const auto end = source.find(bc.close, i + bc.open.size());
                i = end == std::string_view::npos ? n : end + bc.close.size();
                skipped = true;
                break;
            }
        }
        if (skipped) continue;
        for (auto lc : line_comments) {
            if (starts_with(i, lc)) {
                const auto end = source.find('\n', i);
                i = end == std::string_view::npos ? n : end;
                skipped = true;
                break;
            }
        }
        if (skipped) continue;
        for (auto q : delimiters) {
            if (starts_with(i, q)) {
                std::size_t j = i + q.size();
                while (j < n && !starts_with(j, q)) j += source[j] == '\\' ? 2 : 1;
                i = j >= n ? n : j + q.size();
                skipped = true;
                break;
            }
        }
        if (skipped) continue;

        const auto c = static_cast<unsigned char>(source[i]);
        if (is_ident_byte(c)) {
            std::size_t j = i;
            while (j < n && is_ident_byte(static_cast<unsigned char>(source[j]))) ++j;
            const auto word = source.substr(i, j - i);
            if (std::find(words.begin(), words.end(), word) != words.end()) ++decisions;
            i = j;
            continue;
        }
        bool matched = false;
        for (auto op : operators) {
            if (starts_with(i, op)) {
                ++decisions;
                i += op.size();
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return 1 + decisions;
}

std::size_t cc_delta(const std::optional<std::string>& before, const std::optional<std::string>& after,
                     const LanguageProfile& profile) {
    if (!profile.supports_complexity()) {
        throw ComplexityUnavailable(std::string(kStage), "profile '" + profile.name + "' has no decision tokens");
    }
    const std::size_t cb = before ? cyclomatic_complexity(*before, profile) : 0;
    const std::size_t ca = after ? cyclomatic_complexity(*after, profile) : 0;
    return ca > cb ? ca - cb : cb - ca;
}

ContributionMeasure measure_commit(const CommitRecord& record, MetricKind requested, const ProfileRegistry& registry,
                                   const MeasureOptions& options) {
    if (record.is_merge) {
        throw ContractViolation(std::string(kStage), "merge commit " + record.commit_id + " cannot be measured");
    }
    ContributionMeasure m;
    m.commit_id = record.commit_id;
    m.requested_metric = requested;

    for (const auto& f : record.files) {
        if (f.is_binary) {
            ++m.binary_files;
            continue;
        }
        const std::string_view before = f.before ? std::string_view(*f.before) : std::string_view{};
        const std::string_view after = f.after ? std::string_view(*f.after) : std::string_view{};

        FileMeasure fm;
        fm.path = f.path;
        if (requested != MetricKind::LocDelta && std::max(before.size(), after.size()) > options.max_file_chars) {
            fm.effective_metric = MetricKind::LocDelta;
            fm.size_fallback = true;
            m.size_fallback_applied = true;
        } else if (requested == MetricKind::CyclomaticDelta) {
            const LanguageProfile* profile = registry.find_by_path(f.path);
            if (profile != nullptr && profile->supports_complexity()) {
                fm.effective_metric = MetricKind::CyclomaticDelta;
                fm.delta = static_cast<double>(cc_delta(f.before, f.after, *profile));
            } else {
                fm.effective_metric = MetricKind::LevenshteinWords;
                m.fallback_applied = true;
            }
        } else {
            fm.effective_metric = requested;
        }

        if (fm.effective_metric == MetricKind::LocDelta) {
            fm.delta = static_cast<double>(line_diff_delta(before, after));
        } else if (fm.effective_metric == MetricKind::LevenshteinWords) {
            const auto tb = tokenize_words(before);
            const auto ta = tokenize_words(after);
            fm.delta = static_cast<double>(levenshtein_words(tb, ta));
        }
        m.delta_l += fm.delta;
        m.per_file.push_back(std::move(fm));
    }

    m.effective_metric = requested;
    if (!m.per_file.empty()) {
        const MetricKind first = m.per_file.front().effective_metric;
        const bool uniform = std::all_of(m.per_file.begin(), m.per_file.end(),
                                         [&](const FileMeasure& fm) { return fm.effective_metric == first; });
        if (uniform) m.effective_metric = first;
    }
    return m;
}

}  // namespace crim
