#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crim/ingest.hpp"

namespace crim {

enum class MetricKind { LocDelta, LevenshteinWords, CyclomaticDelta };

/// Short CLI name: "loc", "lev", "cc".
[[nodiscard]] std::string_view metric_name(MetricKind kind) noexcept;
/// Inverse of metric_name; also accepts the long enum spellings. Throws
/// InputError on anything else.
[[nodiscard]] MetricKind parse_metric(std::string_view name);

struct BlockComment {
    std::string open;
    std::string close;
    friend bool operator==(const BlockComment&, const BlockComment&) = default;
};

/// Token tables driving the decision-point counter for one language family.
/// A profile with no decision tokens is known to the registry but cannot
/// measure complexity (markup, data files).
struct LanguageProfile {
    std::string name;
    std::vector<std::string> extensions;  // lowercase, without the dot
    std::vector<std::string> decision_tokens;
    std::vector<std::string> function_tokens;
    std::vector<std::string> line_comments;
    std::vector<BlockComment> block_comments;
    std::vector<std::string> string_delimiters;

    [[nodiscard]] bool supports_complexity() const noexcept { return !decision_tokens.empty(); }

    friend bool operator==(const LanguageProfile&, const LanguageProfile&) = default;
};

class ProfileRegistry {
public:
    ProfileRegistry() = default;
    /// Throws InputError when two profiles claim the same extension.
    explicit ProfileRegistry(std::vector<LanguageProfile> profiles);

    /// Profiles shipped with the library: c-like, python, shell, markup.
    static const ProfileRegistry& builtin();
    static ProfileRegistry from_json(std::string_view text);
    static ProfileRegistry load(const std::filesystem::path& file);

    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] const LanguageProfile* find_by_path(std::string_view path) const;
    [[nodiscard]] const LanguageProfile* find_by_name(std::string_view name) const;
    [[nodiscard]] std::span<const LanguageProfile> profiles() const noexcept { return profiles_; }

private:
    std::vector<LanguageProfile> profiles_;
    std::map<std::string, std::size_t, std::less<>> by_extension_;
};

/// Maximal runs of non-whitespace, where whitespace is the Unicode
/// White_Space property over UTF-8 input.
[[nodiscard]] std::vector<std::string> tokenize_words(std::string_view text);

/// Minimum single-token insertions, deletions and substitutions turning `a`
/// into `b`. Two-row dynamic program.
[[nodiscard]] std::size_t levenshtein_words(std::span<const std::string> a, std::span<const std::string> b);

/// Lines present only in `before` plus lines present only in `after`, under a
/// longest-common-subsequence alignment. A modified line counts twice.
[[nodiscard]] std::size_t line_diff_delta(std::string_view before, std::string_view after);

/// 1 + number of decision tokens outside comments and string literals.
/// Throws ComplexityUnavailable when the profile has no decision tokens.
[[nodiscard]] std::size_t cyclomatic_complexity(std::string_view source, const LanguageProfile& profile);

/// |CC(after) - CC(before)| with CC(absent) = 0.
[[nodiscard]] std::size_t cc_delta(const std::optional<std::string>& before, const std::optional<std::string>& after,
                                   const LanguageProfile& profile);

struct FileMeasure {
    std::string path;
    double delta = 0.0;
    MetricKind effective_metric = MetricKind::LocDelta;
    bool size_fallback = false;  // measured by line diff because of file size
};

struct ContributionMeasure {
    std::string commit_id;
    MetricKind requested_metric = MetricKind::LocDelta;
    MetricKind effective_metric = MetricKind::LocDelta;
    double delta_l = 0.0;
    std::vector<FileMeasure> per_file;  // binary changes are not listed
    bool fallback_applied = false;       // complexity -> word distance for some file
    bool size_fallback_applied = false;  // some file too large for the requested metric
    std::size_t binary_files = 0;
};

struct MeasureOptions {
    std::size_t max_file_chars = 1'000'000;
};

/// Contribution size of one non-merge commit. Throws ContractViolation for
/// merge commits.
[[nodiscard]] ContributionMeasure measure_commit(const CommitRecord& record, MetricKind requested,
                                                 const ProfileRegistry& registry, const MeasureOptions& options = {});

}  // namespace crim
