// crim: estimate developer person-hours from commit history.
//
//   crim analyze (<repo-path> | --jsonl FILE) [options]
//   crim synth --seed S --commits N --authors K --rho R --noise SIGMA --out FILE.jsonl --truth FILE.csv
//   crim profiles dump

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crim/errors.hpp"
#include "crim/pipeline.hpp"
#include "crim/synth.hpp"

namespace {

struct AnalyzeArgs {
    std::string repo;
    std::string jsonl;
    std::string metric = "lev";
    std::int64_t t_min = 60;
    std::int64_t t_max = 28'800;
    double trim = 0.05;
    std::size_t min_support = 5;
    bool no_cap = false;
    bool exclude_zero = false;
    std::string bucket = "all";
    std::string identity_map;
    std::optional<std::int64_t> since;
    std::optional<std::int64_t> until;
    std::string format = "csv";
    std::string profiles;
    std::string model_in;
    std::string model_out;
    std::string explain;
    unsigned workers = 0;
    std::size_t max_file_chars = 1'000'000;
};

std::optional<std::filesystem::path> path_or_none(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

int run_analyze(const AnalyzeArgs& a) {
    crim::RunConfig cfg;
    try {
        cfg.repo_path = path_or_none(a.repo);
        cfg.jsonl_path = path_or_none(a.jsonl);
        cfg.pipeline.metric = crim::parse_metric(a.metric);
        cfg.pipeline.bounds = crim::RateBounds{a.t_min, a.t_max, a.trim};
        cfg.pipeline.min_support = a.min_support;
        cfg.pipeline.cap_enabled = !a.no_cap;
        cfg.pipeline.exclude_zero_rates = a.exclude_zero;
        cfg.pipeline.workers = a.workers;
        cfg.pipeline.measure.max_file_chars = a.max_file_chars;
        cfg.pipeline.window = crim::GitWindow{a.since, a.until};
        cfg.bucket = crim::parse_bucket(a.bucket);
        cfg.format = crim::parse_format(a.format);
        cfg.identity_map = path_or_none(a.identity_map);
        cfg.profiles = path_or_none(a.profiles);
        cfg.model_in = path_or_none(a.model_in);
        cfg.model_out = path_or_none(a.model_out);
        if (!a.explain.empty()) cfg.explain = a.explain;
    } catch (const crim::Error& e) {
        std::cerr << "crim: error [" << e.stage() << "]: " << e.what() << "\n";
        return crim::kExitError;
    }
    return crim::run(cfg, std::cout, std::cerr);
}

struct SynthArgs {
    crim::synth::SynthParams params;
    std::string out;
    std::string truth;
};

int run_synth(const SynthArgs& a) {
    try {
        const auto history = crim::synth::generate(a.params);
        std::ofstream out(a.out, std::ios::binary);
        if (!out) throw crim::InputError("synth", "cannot write '" + a.out + "'");
        out << crim::render_jsonl(history.records);
        if (!a.truth.empty()) {
            std::ofstream truth(a.truth, std::ios::binary);
            if (!truth) throw crim::InputError("synth", "cannot write '" + a.truth + "'");
            truth << crim::synth::render_truth_csv(history.truth);
        }
        std::cerr << "crim: wrote " << history.records.size() << " commits to " << a.out << "\n";
        return crim::kExitOk;
    } catch (const crim::Error& e) {
        std::cerr << "crim: error [" << e.stage() << "]: " << e.what() << "\n";
        return crim::kExitError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Estimate developer person-hours from version-control history"};
    app.require_subcommand(1);

    app.set_config("--config", "", "INI configuration file; keys for analyze go under [analyze], flags take precedence");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Estimate effort for a repository or JSONL export");
    analyze->fallthrough();
    analyze->add_option("repo", an.repo, "Path to a git repository");
    analyze->add_option("--jsonl", an.jsonl, "Read commits from a JSONL export instead of git");
    analyze->add_option("--metric", an.metric, "Contribution size metric")
        ->check(CLI::IsMember({"loc", "lev", "cc"}))
        ->capture_default_str();
    analyze->add_option("--t-min", an.t_min, "Shortest observed interval in seconds")->capture_default_str();
    analyze->add_option("--t-max", an.t_max, "Longest observed interval in seconds")->capture_default_str();
    analyze->add_option("--trim", an.trim, "Fraction trimmed from each end before averaging rates")->capture_default_str();
    analyze->add_option("--min-support", an.min_support, "Observed samples needed for a per-author rate")
        ->capture_default_str();
    analyze->add_flag("--no-cap", an.no_cap, "Do not cap imputed time at the commit time delta");
    analyze->add_flag("--exclude-zero-rates", an.exclude_zero, "Drop zero-size observed intervals from the fit");
    analyze->add_option("--bucket", an.bucket, "Report bucket")
        ->check(CLI::IsMember({"week", "month", "all"}))
        ->capture_default_str();
    analyze->add_option("--identity-map", an.identity_map, "JSON identity map file");
    analyze->add_option("--since", an.since, "Ignore commits before this Unix timestamp");
    analyze->add_option("--until", an.until, "Ignore commits after this Unix timestamp");
    analyze->add_option("--format", an.format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    analyze->add_option("--profiles", an.profiles, "Language profile JSON file");
    analyze->add_option("--model-in", an.model_in, "Score with a previously fitted rate model");
    analyze->add_option("--model-out", an.model_out, "Write the fitted rate model as JSON");
    analyze->add_option("--explain", an.explain, "Print the derivation for one commit instead of the report");
    analyze->add_option("--workers", an.workers, "Measurement threads (0 = all processors)")->capture_default_str();
    analyze->add_option("--max-file-chars", an.max_file_chars, "Files larger than this are measured by line diff")
        ->capture_default_str();

    SynthArgs sy;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic history with known effort");
    synth->add_option("--seed", sy.params.seed, "Random seed")->capture_default_str();
    synth->add_option("--commits", sy.params.n_commits, "Number of commits")->capture_default_str();
    synth->add_option("--authors", sy.params.n_authors, "Number of authors")->capture_default_str();
    synth->add_option("--rho", sy.params.true_rho, "True contribution rate (words per hour)")->capture_default_str();
    synth->add_option("--noise", sy.params.noise_sigma, "Log-space sd of per-commit rate noise")->capture_default_str();
    synth->add_option("--idle-prob", sy.params.gaps.idle_probability, "Probability of idle time before a commit")
        ->capture_default_str();
    synth->add_option("--idle-min-hours", sy.params.gaps.idle_min_hours, "Minimum idle gap")->capture_default_str();
    synth->add_option("--idle-mean-hours", sy.params.gaps.idle_mean_extra_hours, "Mean idle time beyond the minimum")
        ->capture_default_str();
    synth->add_option("--effort-min", sy.params.effort_min_minutes, "Shortest work session in minutes")
        ->capture_default_str();
    synth->add_option("--effort-max", sy.params.effort_max_minutes, "Longest work session in minutes")
        ->capture_default_str();
    synth->add_option("--out", sy.out, "Output JSONL history")->required();
    synth->add_option("--truth", sy.truth, "Output ground-truth CSV");

    auto* profiles = app.add_subcommand("profiles", "Language profile utilities");
    profiles->require_subcommand(1);
    auto* dump = profiles->add_subcommand("dump", "Print the built-in language profiles as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : crim::kExitError;
    }

    if (analyze->parsed()) return run_analyze(an);
    if (synth->parsed()) return run_synth(sy);
    if (dump->parsed()) {
        std::cout << crim::ProfileRegistry::builtin().to_json();
        return crim::kExitOk;
    }
    return crim::kExitError;
}
