#include "crim/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "crim/errors.hpp"

namespace crim::synth {
namespace {

constexpr std::size_t kMaxFileTokens = 512;
constexpr std::size_t kTokensPerLine = 12;

// Distributions are derived by hand from the engine's raw output so that a
// seed yields the same history with every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(static_cast<std::uint64_t>(uniform() * static_cast<double>(span)) % span);
    }

    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double exponential(double mean) { return -mean * std::log(1.0 - uniform()); }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1)); }

private:
    std::mt19937_64 engine_;
};

struct AuthorState {
    Timestamp clock = 0;
    bool has_committed = false;
    std::string name;
    std::string email;
    std::string path;
    std::vector<std::string> tokens;
    std::size_t part = 0;
};

std::string render_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out += tokens[i];
        out += (i + 1) % kTokensPerLine == 0 || i + 1 == tokens.size() ? '\n' : ' ';
    }
    return out;
}

std::string commit_id_for(std::size_t index) {
    std::string digits = std::to_string(index);
    return "syn" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

// Realizes exactly `edits` word edits on the author's working file: the new
// tokens are globally unique, so no alignment can reuse them and the word
// distance equals substitutions + appends.
FileChange realize_edits(AuthorState& author, std::size_t author_index, std::size_t commit_index, std::size_t edits,
                         Rng& rng) {
    std::size_t fresh = 0;
    const auto next_token = [&] { return "w" + std::to_string(commit_index) + "_" + std::to_string(fresh++); };

    FileChange fc;
    if (author.path.empty() || author.tokens.size() + edits > kMaxFileTokens) {
        author.path = "work/dev" + std::to_string(author_index) + "/part" + std::to_string(author.part++) + ".txt";
        author.tokens.clear();
        for (std::size_t i = 0; i < edits; ++i) author.tokens.push_back(next_token());
        fc.path = author.path;
        fc.after = render_tokens(author.tokens);
        return fc;
    }

    fc.path = author.path;
    fc.before = render_tokens(author.tokens);
    const std::size_t substitutions = std::min(edits, author.tokens.size() / 2);
    std::vector<std::size_t> positions(author.tokens.size());
    std::iota(positions.begin(), positions.end(), 0);
    for (std::size_t i = 0; i < substitutions; ++i) {
        const std::size_t j = i + rng.index(positions.size() - i);
        std::swap(positions[i], positions[j]);
        author.tokens[positions[i]] = next_token();
    }
    for (std::size_t i = substitutions; i < edits; ++i) author.tokens.push_back(next_token());
    fc.after = render_tokens(author.tokens);
    return fc;
}

ErrorSummary summarize(std::span<const double> truth, std::span<const double> est) {
    ErrorSummary s;
    s.count = truth.size();
    if (s.count == 0) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        s.mape = s.median_ape = s.total_relative_error = nan;
        return s;
    }
    std::vector<double> ape(s.count);
    double sum_truth = 0.0;
    double sum_est = 0.0;
    for (std::size_t i = 0; i < s.count; ++i) {
        ape[i] = std::abs(est[i] - truth[i]) / truth[i];
        sum_truth += truth[i];
        sum_est += est[i];
    }
    s.mape = std::accumulate(ape.begin(), ape.end(), 0.0) / static_cast<double>(s.count);
    std::sort(ape.begin(), ape.end());
    const std::size_t mid = s.count / 2;
    s.median_ape = s.count % 2 == 1 ? ape[mid] : 0.5 * (ape[mid - 1] + ape[mid]);
    s.total_relative_error = std::abs(sum_est - sum_truth) / sum_truth;
    return s;
}

}  // namespace

void SynthParams::validate() const {
    if (n_commits < 1) throw ParameterError("synth", "n_commits must be at least 1");
    if (n_authors < 1) throw ParameterError("synth", "n_authors must be at least 1");
    if (!(true_rho > 0.0) || !std::isfinite(true_rho)) throw ParameterError("synth", "true_rho must be positive");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ParameterError("synth", "noise_sigma must be non-negative");
    if (!(gaps.idle_probability >= 0.0 && gaps.idle_probability <= 1.0)) {
        throw ParameterError("synth", "idle probability must lie in [0, 1]");
    }
    if (!(gaps.idle_min_hours >= 0.0) || !(gaps.idle_mean_extra_hours >= 0.0)) {
        throw ParameterError("synth", "idle durations must be non-negative");
    }
    if (effort_min_minutes < 1 || effort_max_minutes < effort_min_minutes) {
        throw ParameterError("synth", "effort range must satisfy 1 <= min <= max minutes");
    }
    if (start_timestamp < 0) throw ParameterError("synth", "start timestamp must be non-negative");
}

SynthHistory generate(const SynthParams& params) {
    params.validate();
    Rng rng(params.seed);

    std::vector<AuthorState> authors(params.n_authors);
    for (std::size_t a = 0; a < authors.size(); ++a) {
        authors[a].name = "Developer " + std::to_string(a);
        authors[a].email = "dev" + std::to_string(a) + "@example.com";
        authors[a].clock = params.start_timestamp + rng.uniform_int(0, 3599);
    }

    SynthHistory h;
    h.records.reserve(params.n_commits);
    h.truth.reserve(params.n_commits);
    bool any_work = false;
    for (std::size_t i = 0; i < params.n_commits; ++i) {
        const std::size_t a = rng.index(authors.size());
        AuthorState& author = authors[a];

        const std::int64_t effort_s = 60 * rng.uniform_int(params.effort_min_minutes, params.effort_max_minutes);
        const double rate = params.true_rho * std::exp(params.noise_sigma * rng.normal());
        std::int64_t idle_s = 0;
        if (author.has_committed && rng.uniform() < params.gaps.idle_probability) {
            const double idle_h = params.gaps.idle_min_hours + rng.exponential(params.gaps.idle_mean_extra_hours);
            idle_s = static_cast<std::int64_t>(std::ceil(idle_h * 3600.0));
        }
        author.has_committed = true;
        author.clock += idle_s + effort_s;

        const double effort_h = static_cast<double>(effort_s) / 3600.0;
        const auto edits = static_cast<std::size_t>(std::llround(effort_h * rate));
        any_work = any_work || edits > 0;

        CommitRecord r;
        r.commit_id = commit_id_for(i);
        r.author_name = author.name;
        r.author_email = author.email;
        r.timestamp = author.clock;
        r.files.push_back(realize_edits(author, a, i, edits, rng));
        h.records.push_back(std::move(r));
        h.truth.push_back(TruthRow{commit_id_for(i), effort_h, rate, edits});
    }
    if (!any_work) throw ParameterError("synth", "parameters realize zero contribution for every commit");

    // Reorder both sequences by (timestamp, commit_id).
    std::vector<std::size_t> order(h.records.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        const auto& rx = h.records[x];
        const auto& ry = h.records[y];
        return rx.timestamp != ry.timestamp ? rx.timestamp < ry.timestamp : rx.commit_id < ry.commit_id;
    });
    SynthHistory sorted;
    sorted.records.reserve(order.size());
    sorted.truth.reserve(order.size());
    for (auto k : order) {
        sorted.records.push_back(std::move(h.records[k]));
        sorted.truth.push_back(std::move(h.truth[k]));
    }
    return sorted;
}

std::string render_truth_csv(std::span<const TruthRow> truth) {
    std::string out = "commit_id,true_effort_hours,true_rate\n";
    char buf[64];
    for (const auto& t : truth) {
        out += t.commit_id;
        std::snprintf(buf, sizeof buf, ",%.17g", t.true_effort_hours);
        out += buf;
        std::snprintf(buf, sizeof buf, ",%.17g\n", t.true_rate);
        out += buf;
    }
    return out;
}

ErrorReport evaluate(std::span<const TruthRow> truth, std::span<const EffortEstimate> estimates) {
    if (truth.size() != estimates.size()) {
        throw ContractViolation("evaluate", "estimates (" + std::to_string(estimates.size()) +
                                                ") and truth rows (" + std::to_string(truth.size()) + ") differ in length");
    }
    std::vector<double> all_t, all_e, imp_t, imp_e;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].commit_id != estimates[i].commit_id) {
            throw ContractViolation("evaluate", "estimate " + estimates[i].commit_id + " misaligned with truth " +
                                                    truth[i].commit_id);
        }
        all_t.push_back(truth[i].true_effort_hours);
        all_e.push_back(estimates[i].delta_t_hours);
        if (estimates[i].source == EffortSource::Imputed) {
            imp_t.push_back(truth[i].true_effort_hours);
            imp_e.push_back(estimates[i].delta_t_hours);
        }
    }
    return ErrorReport{summarize(imp_t, imp_e), summarize(all_t, all_e)};
}

}  // namespace crim::synth
