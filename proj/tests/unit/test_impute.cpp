#include <doctest.h>

#include <cmath>
#include <random>

#include "crim/errors.hpp"
#include "crim/impute.hpp"

using namespace crim;

namespace {

RateModel model(double rho) {
    RateModel m;
    m.global_rho = rho;
    m.metric = MetricKind::LevenshteinWords;
    m.total_support = 10;
    return m;
}

RateSample sample(ObservationClass c, double delta_l, std::optional<std::int64_t> ctd) {
    RateSample s;
    s.commit_id = "c";
    s.author_id = "a";
    s.metric = MetricKind::LevenshteinWords;
    s.delta_l = delta_l;
    s.ctd_seconds = ctd;
    s.observation = c;
    if (c == ObservationClass::Observed) s.rate_per_hour = contribution_rate(delta_l, *ctd);
    return s;
}

}  // namespace

TEST_SUITE("impute_time") {
    TEST_CASE("direct application") {
        CHECK(impute_time(100, 50) == 2.0);
        CHECK(impute_time(0, 7) == 0.0);
        CHECK_THROWS_AS((void)impute_time(1, 0), DomainError);
        CHECK_THROWS_AS((void)impute_time(1, -2), DomainError);
        CHECK_THROWS_AS((void)impute_time(1, INFINITY), DomainError);
    }

    TEST_CASE("monotone in both arguments") {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> dl(0.0, 1e6), rho(1e-3, 1e4);
        for (int i = 0; i < 1000; ++i) {
            double a = dl(rng), b = dl(rng), r1 = rho(rng), r2 = rho(rng);
            if (a > b) std::swap(a, b);
            if (r1 > r2) std::swap(r1, r2);
            CHECK(impute_time(a, r1) <= impute_time(b, r1));
            CHECK(impute_time(a, r1) >= impute_time(a, r2));
        }
    }
}

TEST_SUITE("estimate_commit_effort") {
    TEST_CASE("observed interval is measured") {
        const auto e = estimate_commit_effort(sample(ObservationClass::Observed, 10, 3600), model(50));
        CHECK(e.delta_t_hours == 1.0);
        CHECK(e.source == EffortSource::Measured);
        CHECK_FALSE(e.capped);
        CHECK_FALSE(e.rho_used.has_value());
    }

    TEST_CASE("degenerate interval is measured as its CTD") {
        const auto e = estimate_commit_effort(sample(ObservationClass::Degenerate, 500, 36), model(50));
        CHECK(e.delta_t_hours == 0.01);
        CHECK(e.source == EffortSource::Measured);
    }

    TEST_CASE("long gap is imputed, cap not binding") {
        const auto e = estimate_commit_effort(sample(ObservationClass::Unobserved, 100, 604'800), model(50));
        CHECK(e.delta_t_hours == 2.0);
        CHECK(e.source == EffortSource::Imputed);
        CHECK_FALSE(e.capped);
        CHECK(e.rho_used == 50.0);
    }

    TEST_CASE("imputation capped by wall clock") {
        auto s = sample(ObservationClass::Unobserved, 10'000, 7200);
        const auto e = estimate_commit_effort(s, model(50));
        CHECK(e.delta_t_hours == 2.0);
        CHECK(e.capped);
        CHECK(e.source == EffortSource::Imputed);

        const auto uncapped = estimate_commit_effort(s, model(50), EstimateOptions{5, false});
        CHECK(uncapped.delta_t_hours == 200.0);
        CHECK_FALSE(uncapped.capped);
    }

    TEST_CASE("first commit is imputed without a cap") {
        const auto e = estimate_commit_effort(sample(ObservationClass::Unobserved, 10'000, std::nullopt), model(50));
        CHECK(e.delta_t_hours == 200.0);
        CHECK_FALSE(e.capped);
    }

    TEST_CASE("per-author rho respects min_support") {
        auto m = model(50);
        m.per_author["a"] = AuthorRate{25.0, 3};
        const auto s = sample(ObservationClass::Unobserved, 100, std::nullopt);
        CHECK(estimate_commit_effort(s, m, EstimateOptions{3, true}).delta_t_hours == 4.0);
        CHECK(estimate_commit_effort(s, m, EstimateOptions{4, true}).delta_t_hours == 2.0);
    }

    TEST_CASE("metric mismatch") {
        auto m = model(50);
        m.metric = MetricKind::LocDelta;
        CHECK_THROWS_AS((void)estimate_commit_effort(sample(ObservationClass::Observed, 1, 3600), m), ContractViolation);
    }
}

TEST_SUITE("estimate_history") {
    TEST_CASE("empty and all-observed") {
        CHECK(estimate_history(std::vector<RateSample>{}, model(1)).empty());
        std::vector<RateSample> s;
        std::int64_t total = 0;
        for (int i = 0; i < 10; ++i) {
            const std::int64_t ctd = 600 + 97 * i;
            total += ctd;
            s.push_back(sample(ObservationClass::Observed, i, ctd));
        }
        double hours = 0.0;
        for (const auto& e : estimate_history(s, model(1))) hours += e.delta_t_hours;
        CHECK(hours == doctest::Approx(static_cast<double>(total) / 3600.0).epsilon(1e-12));
    }

    TEST_CASE("errors carry the commit id") {
        auto s = sample(ObservationClass::Observed, 1, 3600);
        s.commit_id = "bad-commit";
        s.metric = MetricKind::CyclomaticDelta;
        try {
            (void)estimate_history(std::vector{s}, model(1));
            FAIL("expected a contract violation");
        } catch (const ContractViolation& e) {
            CHECK(std::string(e.what()).find("bad-commit") != std::string::npos);
        }
    }

    TEST_CASE("scale consistency of imputed estimates") {
        std::mt19937_64 rng(12);
        for (int round = 0; round < 100; ++round) {
            const double k = 1.0 + static_cast<double>(rng() % 20);
            const double rho = 1.0 + static_cast<double>(rng() % 1000) / 3.0;
            const double dl = static_cast<double>(rng() % 5000);
            const auto ctd = static_cast<std::int64_t>(30'000 + rng() % 500'000);
            const auto a = estimate_commit_effort(sample(ObservationClass::Unobserved, dl, ctd), model(rho));
            const auto b = estimate_commit_effort(sample(ObservationClass::Unobserved, dl * k, ctd), model(rho * k));
            CHECK(b.delta_t_hours == doctest::Approx(a.delta_t_hours).epsilon(1e-12));
            CHECK(a.delta_t_hours <= static_cast<double>(ctd) / 3600.0);
        }
    }
}
