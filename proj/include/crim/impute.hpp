#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crim/rates.hpp"

namespace crim {

enum class EffortSource { Measured, Imputed };

[[nodiscard]] std::string_view source_name(EffortSource s) noexcept;

struct EffortEstimate {
    std::string commit_id;
    std::string author_id;
    double delta_t_hours = 0.0;
    EffortSource source = EffortSource::Measured;
    bool capped = false;
    std::optional<double> rho_used;  // imputed estimates only
    double delta_l = 0.0;
    std::optional<std::int64_t> ctd_seconds;
    ObservationClass observation = ObservationClass::Unobserved;
};

struct EstimateOptions {
    std::size_t min_support = 5;
    bool cap_enabled = true;  // cap imputed time at the CTD when one exists
};

/// Hours of work implied by a contribution of size delta_l at rate rho.
/// Throws DomainError unless rho > 0.
[[nodiscard]] double impute_time(double delta_l, double rho);

/// Observed and degenerate intervals report their CTD as measured time;
/// unobserved ones are imputed from the rate provider and capped at the CTD.
[[nodiscard]] EffortEstimate estimate_commit_effort(const RateSample& sample, const RateProvider& rates,
                                                    const EstimateOptions& options = {});
[[nodiscard]] EffortEstimate estimate_commit_effort(const RateSample& sample, const RateModel& model,
                                                    const EstimateOptions& options = {});

[[nodiscard]] std::vector<EffortEstimate> estimate_history(std::span<const RateSample> samples,
                                                           const RateProvider& rates,
                                                           const EstimateOptions& options = {});
[[nodiscard]] std::vector<EffortEstimate> estimate_history(std::span<const RateSample> samples, const RateModel& model,
                                                           const EstimateOptions& options = {});

}  // namespace crim
