#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "crim/errors.hpp"
#include "crim/impute.hpp"
#include "crim/ingest.hpp"
#include "crim/metrics.hpp"
#include "crim/pipeline.hpp"
#include "crim/rates.hpp"
#include "crim/report.hpp"
#include "crim/synth.hpp"

namespace py = pybind11;

namespace {

crim::PipelineOptions make_options(const std::string& metric, std::int64_t t_min, std::int64_t t_max, double trim,
                                   std::size_t min_support, bool cap, unsigned workers) {
    crim::PipelineOptions o;
    o.metric = crim::parse_metric(metric);
    o.bounds.t_min_seconds = t_min;
    o.bounds.t_max_seconds = t_max;
    o.bounds.trim_fraction = trim;
    o.bounds.validate();
    o.min_support = min_support;
    o.cap_enabled = cap;
    o.workers = workers;
    return o;
}

crim::PipelineResult analyze(const std::string& jsonl, const crim::PipelineOptions& options) {
    auto records = crim::parse_jsonl(std::string_view(jsonl));
    py::gil_scoped_release release;
    return crim::run_pipeline(std::move(records), crim::IdentityMap{}, crim::ProfileRegistry::builtin(), options);
}

py::dict estimate_to_dict(const crim::EffortEstimate& e) {
    py::dict d;
    d["commit_id"] = e.commit_id;
    d["author_id"] = e.author_id;
    d["delta_t_hours"] = e.delta_t_hours;
    d["source"] = std::string(crim::source_name(e.source));
    d["capped"] = e.capped;
    d["rho_used"] = e.rho_used;
    d["delta_l"] = e.delta_l;
    d["ctd_seconds"] = e.ctd_seconds;
    d["observation"] = std::string(crim::class_name(e.observation));
    return d;
}

const crim::LanguageProfile& builtin_profile(const std::string& name) {
    static const auto registry = crim::ProfileRegistry::builtin();
    const auto* p = registry.find_by_name(name);
    if (p == nullptr) throw crim::InputError("profiles", "unknown profile '" + name + "'");
    return *p;
}

}  // namespace

PYBIND11_MODULE(_crim, m) {
    m.doc() = "Native core of the crim effort estimator";

    static py::exception<crim::Error> base(m, "Error", PyExc_RuntimeError);
    py::register_exception<crim::InputError>(m, "InputError", base.ptr());
    py::register_exception<crim::EnvironmentError>(m, "ToolError", base.ptr());
    py::register_exception<crim::ContractViolation>(m, "ContractViolation", base.ptr());
    py::register_exception<crim::DomainError>(m, "DomainError", base.ptr());
    py::register_exception<crim::InsufficientData>(m, "InsufficientData", base.ptr());
    py::register_exception<crim::ComplexityUnavailable>(m, "ComplexityUnavailable", base.ptr());
    py::register_exception<crim::ParameterError>(m, "ParameterError", base.ptr());

    m.def("tokenize_words", &crim::tokenize_words, py::arg("text"));
    m.def(
        "levenshtein_words",
        [](const std::vector<std::string>& a, const std::vector<std::string>& b) { return crim::levenshtein_words(a, b); },
        py::arg("a"), py::arg("b"));
    m.def("line_diff_delta", &crim::line_diff_delta, py::arg("before"), py::arg("after"));
    m.def(
        "cyclomatic_complexity",
        [](const std::string& source, const std::string& profile) {
            return crim::cyclomatic_complexity(source, builtin_profile(profile));
        },
        py::arg("source"), py::arg("profile") = "c-like");

    m.def("contribution_rate", &crim::contribution_rate, py::arg("delta_l"), py::arg("ctd_seconds"));
    m.def("impute_time", &crim::impute_time, py::arg("delta_l"), py::arg("rho"));
    m.def(
        "fit_mbcr", [](const std::vector<double>& rates, double trim) { return crim::fit_mbcr(rates, trim); },
        py::arg("rates"), py::arg("trim") = 0.05);

    m.def(
        "estimate_jsonl",
        [](const std::string& jsonl, const std::string& metric, std::int64_t t_min, std::int64_t t_max, double trim,
           std::size_t min_support, bool cap, unsigned workers) {
            const auto r = analyze(jsonl, make_options(metric, t_min, t_max, trim, min_support, cap, workers));
            py::list out;
            for (const auto& e : r.estimates) out.append(estimate_to_dict(e));
            return out;
        },
        py::arg("jsonl"), py::arg("metric") = "lev", py::arg("t_min") = 60, py::arg("t_max") = 28'800,
        py::arg("trim") = 0.05, py::arg("min_support") = 5, py::arg("cap") = true, py::arg("workers") = 0);

    m.def(
        "report_jsonl",
        [](const std::string& jsonl, const std::string& metric, const std::string& bucket, const std::string& format,
           std::int64_t t_min, std::int64_t t_max, double trim, std::size_t min_support, bool cap, unsigned workers) {
            const auto r = analyze(jsonl, make_options(metric, t_min, t_max, trim, min_support, cap, workers));
            const auto rows = crim::aggregate(r.estimates, r.commits, crim::parse_bucket(bucket));
            return crim::render(rows, crim::parse_format(format));
        },
        py::arg("jsonl"), py::arg("metric") = "lev", py::arg("bucket") = "all", py::arg("format") = "csv",
        py::arg("t_min") = 60, py::arg("t_max") = 28'800, py::arg("trim") = 0.05, py::arg("min_support") = 5,
        py::arg("cap") = true, py::arg("workers") = 0);

    m.def(
        "collect_git",
        [](const std::filesystem::path& repo) {
            std::vector<crim::CommitRecord> records;
            {
                py::gil_scoped_release release;
                records = crim::collect_from_git(repo);
            }
            return crim::render_jsonl(records);
        },
        py::arg("repo"), "Export a repository's history as JSONL");

    m.def(
        "synth_generate",
        [](std::uint64_t seed, std::size_t n_commits, std::size_t n_authors, double true_rho, double noise_sigma) {
            crim::synth::SynthParams p;
            p.seed = seed;
            p.n_commits = n_commits;
            p.n_authors = n_authors;
            p.true_rho = true_rho;
            p.noise_sigma = noise_sigma;
            const auto h = crim::synth::generate(p);
            return py::make_tuple(crim::render_jsonl(h.records), crim::synth::render_truth_csv(h.truth));
        },
        py::arg("seed") = 1, py::arg("n_commits") = 100, py::arg("n_authors") = 3, py::arg("true_rho") = 60.0,
        py::arg("noise_sigma") = 0.0, "Return (history_jsonl, truth_csv) for a synthetic history");
}
