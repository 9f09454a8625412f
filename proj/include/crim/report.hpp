#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crim/impute.hpp"
#include "crim/ingest.hpp"

namespace crim {

enum class BucketKind { Week, Month, All };
enum class ReportFormat { Csv, Json };

[[nodiscard]] std::string_view bucket_name(BucketKind kind) noexcept;  // "WEEK", "MONTH", "ALL"
[[nodiscard]] BucketKind parse_bucket(std::string_view name);           // week|month|all
[[nodiscard]] ReportFormat parse_format(std::string_view name);         // csv|json

struct EffortReportRow {
    std::string author_id;
    Timestamp bucket_start = 0;
    BucketKind bucket_kind = BucketKind::All;
    std::size_t commits = 0;
    double measured_hours = 0.0;
    double imputed_hours = 0.0;
    double total_hours = 0.0;
    std::size_t capped_count = 0;

    friend bool operator==(const EffortReportRow&, const EffortReportRow&) = default;
};

/// Start of the bucket holding `ts`: Monday 00:00 UTC for weeks, the 1st at
/// 00:00 UTC for months. Not defined for BucketKind::All.
[[nodiscard]] Timestamp bucket_start(Timestamp ts, BucketKind kind);

/// "YYYY-MM-DDTHH:MM:SSZ"
[[nodiscard]] std::string format_utc(Timestamp ts);

/// Groups estimates by (author, bucket), sorted by (author_id, bucket_start).
/// `records` supplies timestamps and must align with `estimates`. Under
/// BucketKind::All the bucket starts at the author's first commit.
[[nodiscard]] std::vector<EffortReportRow> aggregate(std::span<const EffortEstimate> estimates,
                                                     std::span<const CommitRecord> records, BucketKind kind);

[[nodiscard]] std::string render_csv(std::span<const EffortReportRow> rows);
[[nodiscard]] std::string render_json(std::span<const EffortReportRow> rows);
[[nodiscard]] std::string render(std::span<const EffortReportRow> rows, ReportFormat format);

}  // namespace crim
