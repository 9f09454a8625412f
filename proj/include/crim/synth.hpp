#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "crim/impute.hpp"
#include "crim/ingest.hpp"

namespace crim::synth {

/// Idle time inserted before a commit. With probability `idle_probability`
/// a commit is preceded by `idle_min_hours` plus an exponential tail of mean
/// `idle_mean_extra_hours`; otherwise the author starts work right after the
/// previous commit.
struct GapProfile {
    double idle_probability = 0.3;
    double idle_min_hours = 8.0;
    double idle_mean_extra_hours = 40.0;
};

struct SynthParams {
    std::uint64_t seed = 1;
    std::size_t n_commits = 100;
    std::size_t n_authors = 3;
    double true_rho = 60.0;   // words per hour
    double noise_sigma = 0.0;  // log-space sd of per-commit rate noise
    GapProfile gaps;
    std::int64_t effort_min_minutes = 5;
    std::int64_t effort_max_minutes = 240;
    Timestamp start_timestamp = 1'700'000'000;

    /// Throws ParameterError on out-of-domain values.
    void validate() const;
};

struct TruthRow {
    std::string commit_id;
    double true_effort_hours = 0.0;
    double true_rate = 0.0;
    std::size_t delta_l = 0;  // word edits realized in the commit's files
};

/// Generated history and its ground truth, both in (timestamp, commit_id)
/// order.
struct SynthHistory {
    std::vector<CommitRecord> records;
    std::vector<TruthRow> truth;
};

/// Deterministic for a fixed seed. Each commit's files differ from their
/// previous versions by exactly round(effort * rate) word edits.
[[nodiscard]] SynthHistory generate(const SynthParams& params);

/// `commit_id,true_effort_hours,true_rate` with a header line.
[[nodiscard]] std::string render_truth_csv(std::span<const TruthRow> truth);

struct ErrorSummary {
    std::size_t count = 0;
    double mape = 0.0;                  // fractions: 1.0 means 100%
    double median_ape = 0.0;
    double total_relative_error = 0.0;
};

struct ErrorReport {
    ErrorSummary imputed;
    ErrorSummary all;
};

/// Percentage errors of estimates against truth; estimates must align 1:1
/// with truth rows. Summaries over an empty subset have count 0 and NaN
/// values.
[[nodiscard]] ErrorReport evaluate(std::span<const TruthRow> truth, std::span<const EffortEstimate> estimates);

}  // namespace crim::synth
