#include "crim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crim/errors.hpp"

namespace crim {
namespace {

constexpr std::string_view kStage = "fit";
constexpr std::string_view kModelFormat = "crim-rate-model";

std::vector<double> usable_rates(std::span<const RateSample> samples, const FitOptions& options) {
    std::vector<double> rates;
    for (const auto& s : samples) {
        if (s.observation != ObservationClass::Observed || !s.rate_per_hour) continue;
        if (options.exclude_zero_rates && *s.rate_per_hour == 0.0) continue;
        rates.push_back(*s.rate_per_hour);
    }
    return rates;
}

}  // namespace

std::string_view class_name(ObservationClass c) noexcept {
    switch (c) {
        case ObservationClass::Observed: return "OBSERVED";
        case ObservationClass::Unobserved: return "UNOBSERVED";
        case ObservationClass::Degenerate: return "DEGENERATE";
    }
    return "UNOBSERVED";
}

void RateBounds::validate() const {
    if (t_min_seconds <= 0) throw ParameterError("config", "t_min must be a positive number of seconds");
    if (t_max_seconds <= t_min_seconds) throw ParameterError("config", "t_max must exceed t_min");
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
        throw ParameterError("config", "trim fraction must lie in [0, 0.5)");
    }
}

double contribution_rate(double delta_l, std::int64_t ctd_seconds) {
    if (ctd_seconds <= 0) throw DomainError(std::string(kStage), "contribution rate undefined for a zero-length interval");
    return delta_l / (static_cast<double>(ctd_seconds) / 3600.0);
}

ObservationClass classify(std::optional<std::int64_t> ctd_seconds, const RateBounds& bounds) noexcept {
    if (!ctd_seconds) return ObservationClass::Unobserved;
    if (*ctd_seconds < bounds.t_min_seconds) return ObservationClass::Degenerate;
    if (*ctd_seconds > bounds.t_max_seconds) return ObservationClass::Unobserved;
    return ObservationClass::Observed;
}

std::vector<RateSample> build_samples(std::span<const ContributionMeasure> measures,
                                      std::span<const CommitTimeDelta> ctds, const RateBounds& bounds) {
    if (measures.size() != ctds.size()) {
        throw ContractViolation("classify", "measures and CTDs differ in length");
    }
    std::vector<RateSample> samples;
    samples.reserve(measures.size());
    for (std::size_t i = 0; i < measures.size(); ++i) {
        if (measures[i].commit_id != ctds[i].commit_id) {
            throw ContractViolation("classify", "measure " + measures[i].commit_id + " misaligned with CTD " +
                                                    ctds[i].commit_id);
        }
        RateSample s;
        s.commit_id = ctds[i].commit_id;
        s.author_id = ctds[i].author_id;
        s.metric = measures[i].requested_metric;
        s.delta_l = measures[i].delta_l;
        s.ctd_seconds = ctds[i].ctd_seconds;
        s.observation = classify(s.ctd_seconds, bounds);
        if (s.observation == ObservationClass::Observed && *s.ctd_seconds > 0) {
            s.rate_per_hour = contribution_rate(s.delta_l, *s.ctd_seconds);
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

double fit_mbcr(std::span<const double> rates, double trim_fraction) {
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
        throw ParameterError(std::string(kStage), "trim fraction must lie in [0, 0.5)");
    }
    std::vector<double> sorted(rates.begin(), rates.end());
    std::sort(sorted.begin(), sorted.end());
    const auto drop = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(sorted.size())));
    if (sorted.size() <= 2 * drop || sorted.empty()) {
        throw InsufficientData(std::string(kStage), "insufficient observed samples to fit MBCR");
    }
    const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(drop);
    const auto last = sorted.end() - static_cast<std::ptrdiff_t>(drop);
    const double mean = std::accumulate(first, last, 0.0) / static_cast<double>(last - first);
    if (!(mean > 0.0)) {
        throw InsufficientData(std::string(kStage), "insufficient observed samples to fit MBCR (all observed rates are zero)");
    }
    return mean;
}

double fit_mbcr(std::span<const RateSample> samples, double trim_fraction, const FitOptions& options) {
    const auto rates = usable_rates(samples, options);
    return fit_mbcr(rates, trim_fraction);
}

RateModel fit_model(std::span<const RateSample> samples, const RateBounds& bounds, const FitOptions& options) {
    bounds.validate();
    RateModel model;
    model.bounds = bounds;
    model.metric = samples.empty() ? MetricKind::LocDelta : samples.front().metric;
    for (const auto& s : samples) {
        if (s.metric != model.metric) throw ContractViolation(std::string(kStage), "samples mix contribution metrics");
    }

    const auto all = usable_rates(samples, options);
    model.global_rho = fit_mbcr(all, bounds.trim_fraction);
    model.total_support = all.size();

    std::map<std::string, std::vector<double>, std::less<>> by_author;
    for (const auto& s : samples) {
        if (s.observation != ObservationClass::Observed || !s.rate_per_hour) continue;
        if (options.exclude_zero_rates && *s.rate_per_hour == 0.0) continue;
        by_author[s.author_id].push_back(*s.rate_per_hour);
    }
    for (const auto& [author, rates] : by_author) {
        try {
            model.per_author.emplace(author, AuthorRate{fit_mbcr(rates, bounds.trim_fraction), rates.size()});
        } catch (const InsufficientData&) {
            // All of this author's observed rates are zero; no positive rho to offer.
        }
    }
    return model;
}

double select_rho(const RateModel& model, std::string_view author_id, std::size_t min_support) {
    if (const auto it = model.per_author.find(author_id); it != model.per_author.end() && it->second.support >= min_support) {
        return it->second.rho;
    }
    return model.global_rho;
}

double MbcrProvider::rho_for(std::string_view author_id, std::size_t min_support) const {
    return select_rho(model_, author_id, min_support);
}

// --- persistence -------------------------------------------------------------

std::string RateModel::to_json() const {
    nlohmann::ordered_json doc;
    doc["format"] = kModelFormat;
    doc["version"] = 1;
    doc["metric"] = metric_name(metric);
    doc["bounds"] = {{"t_min_seconds", bounds.t_min_seconds},
                     {"t_max_seconds", bounds.t_max_seconds},
                     {"trim_fraction", bounds.trim_fraction}};
    doc["global_rho"] = global_rho;
    doc["total_support"] = total_support;
    auto authors = nlohmann::ordered_json::array();
    for (const auto& [id, rate] : per_author) {
        authors.push_back({{"author_id", id}, {"rho", rate.rho}, {"support", rate.support}});
    }
    doc["per_author"] = std::move(authors);
    return doc.dump(2) + "\n";
}

RateModel RateModel::from_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("model", std::string("malformed model JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kModelFormat) throw InputError("model", "not a crim rate model");
        if (doc.at("version").get<int>() != 1) throw InputError("model", "unsupported model version");
        RateModel m;
        m.metric = parse_metric(doc.at("metric").get<std::string>());
        const auto& b = doc.at("bounds");
        m.bounds.t_min_seconds = b.at("t_min_seconds").get<std::int64_t>();
        m.bounds.t_max_seconds = b.at("t_max_seconds").get<std::int64_t>();
        m.bounds.trim_fraction = b.at("trim_fraction").get<double>();
        m.bounds.validate();
        m.global_rho = doc.at("global_rho").get<double>();
        m.total_support = doc.at("total_support").get<std::size_t>();
        if (!(m.global_rho > 0.0) || !std::isfinite(m.global_rho)) throw InputError("model", "global_rho must be positive");
        for (const auto& a : doc.at("per_author")) {
            AuthorRate r{a.at("rho").get<double>(), a.at("support").get<std::size_t>()};
            if (!(r.rho > 0.0) || r.support < 1) throw InputError("model", "per-author entries need rho > 0 and support >= 1");
            m.per_author.emplace(a.at("author_id").get<std::string>(), r);
        }
        return m;
    } catch (const json::exception& e) {
        throw InputError("model", std::string("invalid model JSON: ") + e.what());
    } catch (const ParameterError& e) {
        throw InputError("model", std::string("invalid model bounds: ") + e.what());
    }
}

void RateModel::save(const std::filesystem::path& file) const {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw InputError("model", "cannot write model file '" + file.string() + "'");
    out << to_json();
}

RateModel RateModel::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("model", "cannot read model file '" + file.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

}  // namespace crim
