#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crim/impute.hpp"
#include "crim/ingest.hpp"
#include "crim/metrics.hpp"
#include "crim/rates.hpp"
#include "crim/report.hpp"
#include "crim/timedelta.hpp"

namespace crim {

struct PipelineOptions {
    MetricKind metric = MetricKind::LevenshteinWords;
    RateBounds bounds;
    std::size_t min_support = 5;
    bool cap_enabled = true;
    bool exclude_zero_rates = false;
    MeasureOptions measure;
    unsigned workers = 0;  // 0: one per available processor
    GitWindow window;
};

/// Every intermediate of one analysis, index-aligned with `commits`.
struct PipelineResult {
    std::vector<CommitRecord> commits;  // resolved, ordered, merges removed
    std::vector<ContributionMeasure> measures;
    std::vector<CommitTimeDelta> ctds;
    std::vector<RateSample> samples;
    RateModel model;
    std::vector<EffortEstimate> estimates;
    std::size_t merges_skipped = 0;
};

/// Measures commits on `workers` threads; the result is independent of the
/// worker count.
[[nodiscard]] std::vector<ContributionMeasure> measure_all(std::span<const CommitRecord> commits, MetricKind metric,
                                                           const ProfileRegistry& registry,
                                                           const MeasureOptions& options, unsigned workers);

/// resolve -> order -> measure -> CTD -> classify -> fit -> estimate.
/// When `model_in` is given it replaces the fit.
[[nodiscard]] PipelineResult run_pipeline(std::vector<CommitRecord> records, const IdentityMap& identities,
                                          const ProfileRegistry& registry, const PipelineOptions& options,
                                          const RateModel* model_in = nullptr);

/// Human-readable derivation of one commit's estimate. Throws InputError
/// for an unknown commit id.
[[nodiscard]] std::string explain_commit(const PipelineResult& result, std::string_view commit_id,
                                         const PipelineOptions& options);

/// Everything `crim analyze` needs.
struct RunConfig {
    std::optional<std::filesystem::path> repo_path;
    std::optional<std::filesystem::path> jsonl_path;
    PipelineOptions pipeline;
    BucketKind bucket = BucketKind::All;
    ReportFormat format = ReportFormat::Csv;
    std::optional<std::filesystem::path> identity_map;
    std::optional<std::filesystem::path> profiles;
    std::optional<std::filesystem::path> model_in;
    std::optional<std::filesystem::path> model_out;
    std::optional<std::string> explain;

    /// Throws ParameterError unless exactly one input is set and numeric
    /// fields are in range.
    void validate() const;
};

enum ExitStatus : int { kExitOk = 0, kExitError = 1, kExitInsufficientData = 2 };

/// Runs the whole analysis, writing the report (or the --explain text) to
/// `out` and diagnostics to `err`. Returns the process exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace crim
