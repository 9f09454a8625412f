#include "crim/impute.hpp"

#include <algorithm>
#include <cmath>

#include "crim/errors.hpp"

namespace crim {

std::string_view source_name(EffortSource s) noexcept {
    return s == EffortSource::Measured ? "MEASURED" : "IMPUTED";
}

double impute_time(double delta_l, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw DomainError("estimate", "model contribution rate must be positive and finite");
    }
    if (!(delta_l >= 0.0)) throw DomainError("estimate", "contribution size must be non-negative");
    return delta_l / rho;
}

EffortEstimate estimate_commit_effort(const RateSample& sample, const RateProvider& rates,
                                      const EstimateOptions& options) {
    if (sample.metric != rates.metric()) {
        throw ContractViolation("estimate", "commit " + sample.commit_id + " measured in " +
                                                std::string(metric_name(sample.metric)) + " but model uses " +
                                                std::string(metric_name(rates.metric())));
    }
    EffortEstimate e;
    e.commit_id = sample.commit_id;
    e.author_id = sample.author_id;
    e.delta_l = sample.delta_l;
    e.ctd_seconds = sample.ctd_seconds;
    e.observation = sample.observation;

    if (sample.observation != ObservationClass::Unobserved) {
        e.source = EffortSource::Measured;
        e.delta_t_hours = static_cast<double>(*sample.ctd_seconds) / 3600.0;
        return e;
    }

    const double rho = rates.rho_for(sample.author_id, options.min_support);
    e.source = EffortSource::Imputed;
    e.rho_used = rho;
    e.delta_t_hours = impute_time(sample.delta_l, rho);
    if (sample.ctd_seconds && options.cap_enabled) {
        const double wall = static_cast<double>(*sample.ctd_seconds) / 3600.0;
        if (e.delta_t_hours > wall) {
            e.delta_t_hours = wall;
            e.capped = true;
        }
    }
    return e;
}

EffortEstimate estimate_commit_effort(const RateSample& sample, const RateModel& model, const EstimateOptions& options) {
    return estimate_commit_effort(sample, MbcrProvider(model), options);
}

std::vector<EffortEstimate> estimate_history(std::span<const RateSample> samples, const RateProvider& rates,
                                             const EstimateOptions& options) {
    std::vector<EffortEstimate> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        try {
            out.push_back(estimate_commit_effort(s, rates, options));
        } catch (const ContractViolation& e) {
            throw ContractViolation("estimate", std::string(e.what()) + " (commit " + s.commit_id + ")");
        } catch (const DomainError& e) {
            throw DomainError("estimate", std::string(e.what()) + " (commit " + s.commit_id + ")");
        }
    }
    return out;
}

std::vector<EffortEstimate> estimate_history(std::span<const RateSample> samples, const RateModel& model,
                                             const EstimateOptions& options) {
    return estimate_history(samples, MbcrProvider(model), options);
}

}  // namespace crim
