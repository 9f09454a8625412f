#include "crim/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "crim/errors.hpp"

namespace crim {
namespace {

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string fmtg(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::vector<ContributionMeasure> measure_all(std::span<const CommitRecord> commits, MetricKind metric,
                                             const ProfileRegistry& registry, const MeasureOptions& options,
                                             unsigned workers) {
    std::vector<ContributionMeasure> out(commits.size());
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, commits.size())));

    if (workers <= 1) {
        for (std::size_t i = 0; i < commits.size(); ++i) out[i] = measure_commit(commits[i], metric, registry, options);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failure_index = commits.size();
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < commits.size(); i = next++) {
                    try {
                        out[i] = measure_commit(commits[i], metric, registry, options);
                    } catch (...) {
                        // Report the earliest failing commit, as the serial path would.
                        std::lock_guard lock(failure_mutex);
                        if (i < failure_index) {
                            failure_index = i;
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

PipelineResult run_pipeline(std::vector<CommitRecord> records, const IdentityMap& identities,
                            const ProfileRegistry& registry, const PipelineOptions& options, const RateModel* model_in) {
    options.bounds.validate();
    PipelineResult result;

    records = filter_window(std::move(records), options.window);
    records = order_commits(resolve_authors(std::move(records), identities));
    const auto merges = std::erase_if(records, [](const CommitRecord& r) { return r.is_merge; });
    result.merges_skipped = merges;
    result.commits = std::move(records);

    result.measures = measure_all(result.commits, options.metric, registry, options.measure, options.workers);
    result.ctds = compute_ctds(result.commits);
    result.samples = build_samples(result.measures, result.ctds, options.bounds);

    if (model_in != nullptr) {
        if (model_in->metric != options.metric) {
            throw ContractViolation("model", "loaded model uses metric '" + std::string(metric_name(model_in->metric)) +
                                                 "' but the run measures '" + std::string(metric_name(options.metric)) +
                                                 "'");
        }
        result.model = *model_in;
    } else {
        result.model = fit_model(result.samples, options.bounds, FitOptions{options.exclude_zero_rates});
        result.model.metric = options.metric;
    }

    result.estimates = estimate_history(result.samples, result.model,
                                        EstimateOptions{options.min_support, options.cap_enabled});
    return result;
}

std::string explain_commit(const PipelineResult& result, std::string_view commit_id, const PipelineOptions& options) {
    const auto it = std::find_if(result.commits.begin(), result.commits.end(),
                                 [&](const CommitRecord& r) { return r.commit_id == commit_id; });
    if (it == result.commits.end()) {
        throw InputError("explain", "commit '" + std::string(commit_id) + "' not found among analyzed commits");
    }
    const auto i = static_cast<std::size_t>(it - result.commits.begin());
    const CommitRecord& rec = result.commits[i];
    const ContributionMeasure& m = result.measures[i];
    const CommitTimeDelta& d = result.ctds[i];
    const RateSample& s = result.samples[i];
    const EffortEstimate& e = result.estimates[i];
    const RateModel& model = result.model;

    std::ostringstream os;
    os << "commit: " << rec.commit_id << "\n";
    os << "author: " << rec.author_id << " (" << rec.author_name << " <" << rec.author_email << ">)\n";
    os << "timestamp: " << rec.timestamp << " (" << format_utc(rec.timestamp) << ")\n";
    os << "metric: requested " << metric_name(m.requested_metric) << ", effective " << metric_name(m.effective_metric)
       << (m.fallback_applied ? ", complexity fallback to word distance applied" : "")
       << (m.size_fallback_applied ? ", size fallback to line diff applied" : "") << "\n";
    os << "files:\n";
    for (const auto& f : m.per_file) {
        os << "  " << f.path << ": " << fmtg(f.delta) << " (" << metric_name(f.effective_metric)
           << (f.size_fallback ? ", size fallback" : "") << ")\n";
    }
    if (m.binary_files > 0) os << "  (" << m.binary_files << " binary file(s) contribute 0)\n";
    os << "ΔL: " << fmtg(m.delta_l) << "\n";
    if (d.ctd_seconds) {
        os << "CTD: " << *d.ctd_seconds << " s (" << fmt4(static_cast<double>(*d.ctd_seconds) / 3600.0)
           << " h) since " << *d.antecedent_id << "\n";
    } else {
        os << "CTD: none (first commit by this author)\n";
    }
    os << "class: " << class_name(s.observation) << " (bounds " << model.bounds.t_min_seconds << ".."
       << model.bounds.t_max_seconds << " s)\n";
    if (s.rate_per_hour) os << "contribution rate: " << fmtg(*s.rate_per_hour) << " units/h\n";

    if (e.source == EffortSource::Measured) {
        os << "Δt = CTD = " << fmt4(e.delta_t_hours) << " h (measured)\n";
    } else {
        const double rho = *e.rho_used;
        const auto pa = model.per_author.find(e.author_id);
        const std::size_t support = pa == model.per_author.end() ? 0 : pa->second.support;
        if (pa != model.per_author.end() && support >= options.min_support) {
            os << "ρ: " << fmtg(rho) << " units/h (per-author, support " << support << " >= min_support "
               << options.min_support << ")\n";
        } else {
            os << "ρ: " << fmtg(rho) << " units/h (global, support " << model.total_support << "; author support "
               << support << " < min_support " << options.min_support << ")\n";
        }
        const double raw = impute_time(m.delta_l, rho);
        os << "Δt = ΔL/ρ = " << fmtg(m.delta_l) << " / " << fmtg(rho) << " = " << fmt4(raw) << " h\n";
        if (!d.ctd_seconds) {
            os << "cap: none (no antecedent commit)\n";
        } else if (!options.cap_enabled) {
            os << "cap: disabled\n";
        } else {
            const double wall = static_cast<double>(*d.ctd_seconds) / 3600.0;
            os << "cap: min(" << fmt4(raw) << ", " << fmt4(wall) << ") -> " << (e.capped ? "binding" : "not binding")
               << "\n";
        }
    }
    os << "estimate: " << fmt4(e.delta_t_hours) << " h " << source_name(e.source) << (e.capped ? " (capped)" : "")
       << "\n";
    return os.str();
}

void RunConfig::validate() const {
    if (repo_path.has_value() == jsonl_path.has_value()) {
        throw ParameterError("config", "exactly one input is required: a repository path or --jsonl FILE");
    }
    pipeline.bounds.validate();
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        config.validate();

        const ProfileRegistry custom = config.profiles ? ProfileRegistry::load(*config.profiles) : ProfileRegistry{};
        const ProfileRegistry& registry = config.profiles ? custom : ProfileRegistry::builtin();
        const IdentityMap identities = config.identity_map ? IdentityMap::load(*config.identity_map) : IdentityMap{};
        std::optional<RateModel> model_in;
        if (config.model_in) model_in = RateModel::load(*config.model_in);

        std::vector<CommitRecord> records;
        if (config.jsonl_path) {
            std::ifstream in(*config.jsonl_path, std::ios::binary);
            if (!in) throw InputError("ingest", "cannot read JSONL file '" + config.jsonl_path->string() + "'");
            records = parse_jsonl(in);
        } else {
            records = collect_from_git(*config.repo_path, config.pipeline.window);
        }

        const PipelineResult result =
            run_pipeline(std::move(records), identities, registry, config.pipeline, model_in ? &*model_in : nullptr);

        if (config.model_out) result.model.save(*config.model_out);

        if (config.explain) {
            out << explain_commit(result, *config.explain, config.pipeline);
        } else {
            const auto rows = aggregate(result.estimates, result.commits, config.bucket);
            out << render(rows, config.format);
        }
        out.flush();
        return kExitOk;
    } catch (const InsufficientData& e) {
        err << "crim: error [" << e.stage() << "]: " << e.what() << "\n";
        return kExitInsufficientData;
    } catch (const Error& e) {
        err << "crim: error [" << e.stage() << "]: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "crim: error [internal]: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace crim
