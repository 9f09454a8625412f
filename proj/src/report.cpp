#include "crim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "crim/errors.hpp"

namespace crim {
namespace {

constexpr Timestamp kDay = 86'400;

Timestamp floor_div(Timestamp a, Timestamp b) {
    Timestamp q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

struct Civil {
    std::int64_t year;
    unsigned month;
    unsigned day;
};

// Proleptic Gregorian conversions (H. Hinnant's days_from_civil family).
Civil civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {y + (m <= 2 ? 1 : 0), m, d};
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2 ? 1 : 0;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string hours4(double h) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", h);
    return buf;
}

}  // namespace

std::string_view bucket_name(BucketKind kind) noexcept {
    switch (kind) {
        case BucketKind::Week: return "WEEK";
        case BucketKind::Month: return "MONTH";
        case BucketKind::All: return "ALL";
    }
    return "ALL";
}

BucketKind parse_bucket(std::string_view name) {
    if (name == "week" || name == "WEEK") return BucketKind::Week;
    if (name == "month" || name == "MONTH") return BucketKind::Month;
    if (name == "all" || name == "ALL") return BucketKind::All;
    throw InputError("config", "unknown bucket '" + std::string(name) + "' (expected week, month or all)");
}

ReportFormat parse_format(std::string_view name) {
    if (name == "csv") return ReportFormat::Csv;
    if (name == "json") return ReportFormat::Json;
    throw InputError("config", "unknown format '" + std::string(name) + "' (expected csv or json)");
}

Timestamp bucket_start(Timestamp ts, BucketKind kind) {
    const std::int64_t days = floor_div(ts, kDay);
    switch (kind) {
        case BucketKind::Week: {
            // 1970-01-01 was a Thursday, three days after a Monday.
            const std::int64_t since_monday = ((days + 3) % 7 + 7) % 7;
            return (days - since_monday) * kDay;
        }
        case BucketKind::Month: {
            const Civil c = civil_from_days(days);
            return days_from_civil(c.year, c.month, 1) * kDay;
        }
        case BucketKind::All: break;
    }
    throw ContractViolation("report", "bucket_start is not defined for ALL buckets");
}

std::string format_utc(Timestamp ts) {
    const std::int64_t days = floor_div(ts, kDay);
    const std::int64_t secs = ts - days * kDay;
    const Civil c = civil_from_days(days);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(c.year), c.month,
                  c.day, static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                  static_cast<long long>(secs % 60));
    return buf;
}

std::vector<EffortReportRow> aggregate(std::span<const EffortEstimate> estimates, std::span<const CommitRecord> records,
                                       BucketKind kind) {
    if (estimates.size() != records.size()) {
        throw ContractViolation("report", "estimates and records differ in length");
    }
    std::map<std::string, Timestamp, std::less<>> first_seen;
    if (kind == BucketKind::All) {
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto [it, inserted] = first_seen.try_emplace(estimates[i].author_id, records[i].timestamp);
            if (!inserted) it->second = std::min(it->second, records[i].timestamp);
        }
    }

    std::map<std::pair<std::string, Timestamp>, EffortReportRow> rows;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const EffortEstimate& e = estimates[i];
        if (e.commit_id != records[i].commit_id) {
            throw ContractViolation("report", "estimate " + e.commit_id + " misaligned with record " +
                                                  records[i].commit_id);
        }
        const Timestamp start = kind == BucketKind::All ? first_seen.at(e.author_id) : bucket_start(records[i].timestamp, kind);
        auto& row = rows[{e.author_id, start}];
        row.author_id = e.author_id;
        row.bucket_start = start;
        row.bucket_kind = kind;
        ++row.commits;
        (e.source == EffortSource::Measured ? row.measured_hours : row.imputed_hours) += e.delta_t_hours;
        if (e.capped) ++row.capped_count;
    }

    std::vector<EffortReportRow> out;
    out.reserve(rows.size());
    for (auto& [key, row] : rows) {
        row.total_hours = row.measured_hours + row.imputed_hours;
        out.push_back(std::move(row));
    }
    return out;
}

std::string render_csv(std::span<const EffortReportRow> rows) {
    std::string out = "author_id,bucket_start,bucket_kind,commits,measured_hours,imputed_hours,total_hours,capped_count\n";
    for (const auto& r : rows) {
        out += csv_field(r.author_id);
        out += ',' + format_utc(r.bucket_start);
        out += ',' + std::string(bucket_name(r.bucket_kind));
        out += ',' + std::to_string(r.commits);
        out += ',' + hours4(r.measured_hours);
        out += ',' + hours4(r.imputed_hours);
        out += ',' + hours4(r.total_hours);
        out += ',' + std::to_string(r.capped_count);
        out += '\n';
    }
    return out;
}

std::string render_json(std::span<const EffortReportRow> rows) {
    auto doc = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["author_id"] = r.author_id;
        o["bucket_start"] = format_utc(r.bucket_start);
        o["bucket_kind"] = bucket_name(r.bucket_kind);
        o["commits"] = r.commits;
        o["measured_hours"] = r.measured_hours;
        o["imputed_hours"] = r.imputed_hours;
        o["total_hours"] = r.total_hours;
        o["capped_count"] = r.capped_count;
        doc.push_back(std::move(o));
    }
    return doc.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
}

std::string render(std::span<const EffortReportRow> rows, ReportFormat format) {
    return format == ReportFormat::Csv ? render_csv(rows) : render_json(rows);
}

}  // namespace crim
