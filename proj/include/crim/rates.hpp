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

#include "crim/metrics.hpp"
#include "crim/timedelta.hpp"

namespace crim {

enum class ObservationClass { Observed, Unobserved, Degenerate };

[[nodiscard]] std::string_view class_name(ObservationClass c) noexcept;

/// CTD window inside which an interval counts as continuous work, plus the
/// symmetric trim applied when averaging rates.
struct RateBounds {
    std::int64_t t_min_seconds = 60;
    std::int64_t t_max_seconds = 28'800;
    double trim_fraction = 0.05;

    /// Throws ParameterError unless 0 < t_min < t_max and trim in [0, 0.5).
    void validate() const;

    friend bool operator==(const RateBounds&, const RateBounds&) = default;
};

struct RateSample {
    std::string commit_id;
    std::string author_id;
    MetricKind metric = MetricKind::LocDelta;
    double delta_l = 0.0;
    std::optional<std::int64_t> ctd_seconds;
    std::optional<double> rate_per_hour;  // present iff Observed with ctd > 0
    ObservationClass observation = ObservationClass::Unobserved;
};

struct AuthorRate {
    double rho = 0.0;
    std::size_t support = 0;

    friend bool operator==(const AuthorRate&, const AuthorRate&) = default;
};

/// Anything able to hand out a contribution rate for an author. The mean
/// bound model below is the only implementation shipped; regression-style
/// providers plug in here.
class RateProvider {
public:
    virtual ~RateProvider() = default;
    [[nodiscard]] virtual MetricKind metric() const = 0;
    [[nodiscard]] virtual double rho_for(std::string_view author_id, std::size_t min_support) const = 0;
};

/// Mean Bound Contribution Rate model: global and per-author trimmed means of
/// observed rates, in metric units per hour.
struct RateModel {
    double global_rho = 0.0;
    std::map<std::string, AuthorRate, std::less<>> per_author;
    RateBounds bounds;
    MetricKind metric = MetricKind::LocDelta;
    std::size_t total_support = 0;

    [[nodiscard]] std::string to_json() const;
    static RateModel from_json(std::string_view text);
    void save(const std::filesystem::path& file) const;
    static RateModel load(const std::filesystem::path& file);

    friend bool operator==(const RateModel&, const RateModel&) = default;
};

class MbcrProvider final : public RateProvider {
public:
    explicit MbcrProvider(const RateModel& model) : model_(model) {}
    [[nodiscard]] MetricKind metric() const override { return model_.metric; }
    [[nodiscard]] double rho_for(std::string_view author_id, std::size_t min_support) const override;

private:
    const RateModel& model_;
};

/// delta_l per hour of ctd. Throws DomainError when ctd_seconds <= 0.
[[nodiscard]] double contribution_rate(double delta_l, std::int64_t ctd_seconds);

[[nodiscard]] ObservationClass classify(std::optional<std::int64_t> ctd_seconds, const RateBounds& bounds) noexcept;

/// Pairs measures with CTDs (aligned by index and commit id) into classified
/// rate samples.
[[nodiscard]] std::vector<RateSample> build_samples(std::span<const ContributionMeasure> measures,
                                                    std::span<const CommitTimeDelta> ctds, const RateBounds& bounds);

struct FitOptions {
    bool exclude_zero_rates = false;
};

/// Trimmed mean: sort ascending, drop floor(trim * n) from each end, average
/// the rest. Throws InsufficientData when nothing remains or the mean is not
/// positive.
[[nodiscard]] double fit_mbcr(std::span<const double> rates, double trim_fraction);
[[nodiscard]] double fit_mbcr(std::span<const RateSample> samples, double trim_fraction, const FitOptions& options = {});

[[nodiscard]] RateModel fit_model(std::span<const RateSample> samples, const RateBounds& bounds,
                                  const FitOptions& options = {});

/// Per-author rho when that author has at least `min_support` observed
/// samples, else the global rho.
[[nodiscard]] double select_rho(const RateModel& model, std::string_view author_id, std::size_t min_support);

}  // namespace crim
