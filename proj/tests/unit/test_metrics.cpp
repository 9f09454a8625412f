#include <doctest.h>

#include <algorithm>
#include <random>

#include "crim/errors.hpp"
#include "crim/metrics.hpp"
#include "support/complexity_fixtures.hpp"
#include "support/oracles.hpp"

using namespace crim;

namespace {

using Tokens = std::vector<std::string>;

const LanguageProfile& c_like() { return *ProfileRegistry::builtin().find_by_name("c-like"); }

FileChange text_change(std::string path, std::optional<std::string> before, std::optional<std::string> after) {
    FileChange f;
    f.path = std::move(path);
    f.before = std::move(before);
    f.after = std::move(after);
    return f;
}

Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
    Tokens t(rng() % (max_len + 1));
    for (auto& s : t) s = std::string(1, static_cast<char>('a' + rng() % alphabet));
    return t;
}

}  // namespace

TEST_SUITE("tokenize_words") {
    TEST_CASE("whitespace classes") {
        CHECK(tokenize_words("").empty());
        CHECK(tokenize_words("a  b") == Tokens{"a", "b"});
        CHECK(tokenize_words("a\nb\tc") == Tokens{"a", "b", "c"});
        CHECK(tokenize_words("  lead trail  ") == Tokens{"lead", "trail"});
        CHECK(tokenize_words("x,y; z") == Tokens{"x,y;", "z"});
    }

    TEST_CASE("unicode whitespace splits, other unicode does not") {
        CHECK(tokenize_words("a b　c d") == Tokens{"a", "b", "c", "d"});
        CHECK(tokenize_words("naïve café") == Tokens{"naïve", "café"});
    }
}

TEST_SUITE("levenshtein_words") {
    TEST_CASE("identity and pure insertion") {
        CHECK(levenshtein_words(Tokens{"x", "y"}, Tokens{"x", "y"}) == 0);
        CHECK(levenshtein_words(Tokens{}, Tokens{"a", "b", "c"}) == 3);
        CHECK(levenshtein_words(Tokens{"a", "b", "c"}, Tokens{}) == 3);
    }

    TEST_CASE("substitution plus insertion matches the exhaustive oracle") {
        const Tokens a{"the", "quick", "fox"};
        const Tokens b{"the", "slow", "brown", "fox"};
        // the=0 quick=1 fox=2 slow=3 brown=4
        const auto dist = test::edit_script_bfs({0, 1, 2}, 5, 5);
        const std::size_t oracle = dist.at({0, 3, 4, 2});
        CHECK(oracle == 2);
        CHECK(levenshtein_words(a, b) == oracle);
    }

    TEST_CASE("metric properties against the DP oracle") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 500; ++i) {
            const auto a = random_tokens(rng, 12, 4);
            const auto b = random_tokens(rng, 12, 4);
            const auto c = random_tokens(rng, 12, 4);
            const auto ab = levenshtein_words(a, b);
            CHECK(ab == test::dp_levenshtein(a, b));
            CHECK(levenshtein_words(a, a) == 0);
            CHECK(ab == levenshtein_words(b, a));
            CHECK(levenshtein_words(a, c) <= ab + levenshtein_words(b, c));
            const auto lo = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
            CHECK(ab >= lo);
            CHECK(ab <= std::max(a.size(), b.size()));
        }
    }
}

TEST_SUITE("line_diff_delta") {
    TEST_CASE("worked examples") {
        CHECK(line_diff_delta("same\ntext\n", "same\ntext\n") == 0);
        CHECK(line_diff_delta("", "x\n") == 1);
        CHECK(line_diff_delta("a\nb\nc", "a\nX\nc") ==
              test::lcs_line_delta({"a", "b", "c"}, {"a", "X", "c"}));
        CHECK(line_diff_delta("a\nb\nc", "a\nX\nc") == 2);
    }

    TEST_CASE("trailing newline does not create a line") {
        CHECK(line_diff_delta("x", "x\n") == 0);
        CHECK(line_diff_delta("x\n\n", "x\n") == 1);
    }

    TEST_CASE("agrees with the LCS oracle and is symmetric") {
        std::mt19937_64 rng(5);
        for (int i = 0; i < 400; ++i) {
            const auto a = random_tokens(rng, 25, 5);
            const auto b = random_tokens(rng, 25, 5);
            const auto ta = test::join_lines(a);
            const auto tb = test::join_lines(b);
            const auto d = line_diff_delta(ta, tb);
            CHECK(d == test::lcs_line_delta(a, b));
            CHECK(d == line_diff_delta(tb, ta));
            CHECK(line_diff_delta(ta, ta) == 0);
        }
    }
}

TEST_SUITE("cyclomatic_complexity") {
    TEST_CASE("worked examples") {
        CHECK(cyclomatic_complexity("return 1;", c_like()) == 1);
        CHECK(cyclomatic_complexity("if (a && b) { } else if (c) { }", c_like()) == 4);
        CHECK(cyclomatic_complexity("// if disabled\nreturn;", c_like()) == 1);
    }

    TEST_CASE("word boundaries and literal operators") {
        CHECK(cyclomatic_complexity("verify(x); iffy = notif;", c_like()) == 1);
        CHECK(cyclomatic_complexity("x = a ? b : c || d;", c_like()) == 3);
        CHECK(cyclomatic_complexity("s = \"if (x && y)\"; /* while */ c = '?';", c_like()) == 1);
        CHECK(cyclomatic_complexity("s = \"esc \\\" if\"; if (q) {}", c_like()) == 2);
    }

    TEST_CASE("agrees with the regex stripping oracle on generated C snippets") {
        const std::vector<std::string> pieces{"if (a) {", "}", "while (k--) x++;", "for (;;) {", "// if while for",
                                              "/* case && */", "y = p ? q : r;", "s = \"for if\";", "a && b || c;",
                                              "switch (v) { case 1: break; }", "verify(z);", "try {} catch (e) {}",
                                              "c = 'x';", "elsewhere();"};
        std::mt19937_64 rng(23);
        for (int i = 0; i < 300; ++i) {
            std::string src;
            const auto n = rng() % 8;
            for (std::size_t k = 0; k < n; ++k) src += pieces[rng() % pieces.size()] + "\n";
            CHECK(cyclomatic_complexity(src, c_like()) == test::regex_c_complexity(src));
        }
    }

    TEST_CASE("profiles without decision tokens are unavailable") {
        const auto* markup = ProfileRegistry::builtin().find_by_name("markup");
        REQUIRE(markup != nullptr);
        CHECK_FALSE(markup->supports_complexity());
        CHECK_THROWS_AS((void)cyclomatic_complexity("<p>hi</p>", *markup), ComplexityUnavailable);
        CHECK_THROWS_AS((void)cc_delta(std::string("a"), std::nullopt, *markup), ComplexityUnavailable);
    }
}

TEST_SUITE("cc_delta") {
    TEST_CASE("equal complexity, created file, added branch") {
        CHECK(cc_delta(std::string("if(a){} if(b){}"), std::string("while(a){} for(;;){}"), c_like()) == 0);
        CHECK(cc_delta(std::nullopt, std::string("if(a){} if(b){} if(c){} if(d){}"), c_like()) == 5);
        CHECK(cc_delta(std::string("if(a){}"), std::string("if(a){} if(b){}"), c_like()) ==
              cyclomatic_complexity("if(a){} if(b){}", c_like()) - cyclomatic_complexity("if(a){}", c_like()));
        CHECK(cc_delta(std::string("if(a){}"), std::string("if(a){} if(b){}"), c_like()) == 1);
        CHECK(cc_delta(std::string("if(a){} if(b){}"), std::nullopt, c_like()) == 3);
    }
}

TEST_SUITE("profiles") {
    TEST_CASE("lookup by extension is case-insensitive and needs a dot") {
        const auto& reg = ProfileRegistry::builtin();
        CHECK(reg.find_by_path("src/A.CPP")->name == "c-like");
        CHECK(reg.find_by_path("tool.py")->name == "python");
        CHECK(reg.find_by_path("x/run.sh")->name == "shell");
        CHECK(reg.find_by_path("index.html")->name == "markup");
        CHECK(reg.find_by_path("Makefile") == nullptr);
        CHECK(reg.find_by_path(".bashrc") == nullptr);
        CHECK(reg.find_by_path("dir.d/noext") == nullptr);
    }

    TEST_CASE("dump then load reproduces the registry") {
        const auto& reg = ProfileRegistry::builtin();
        const auto again = ProfileRegistry::from_json(reg.to_json());
        REQUIRE(again.profiles().size() == reg.profiles().size());
        for (std::size_t i = 0; i < reg.profiles().size(); ++i) CHECK(again.profiles()[i] == reg.profiles()[i]);
    }

    TEST_CASE("duplicate extensions are rejected") {
        CHECK_THROWS_AS(ProfileRegistry::from_json(R"({"profiles":[{"name":"a","extensions":["x"]},{"name":"b","extensions":[".X"]}]})"),
                        InputError);
        CHECK_THROWS_AS(ProfileRegistry::from_json("{}"), InputError);
    }

    TEST_CASE("custom profile drives the counter") {
        const auto reg = ProfileRegistry::from_json(
            R"({"profiles":[{"name":"lua","extensions":["lua"],"decision_tokens":["if","while","and","or"],)"
            R"("comments":{"line":["--"],"block":[["--[[","]]"]]},"string_delimiters":["\""]}]})");
        const auto* lua = reg.find_by_path("m.lua");
        REQUIRE(lua != nullptr);
        CHECK(cyclomatic_complexity("if a and b then end --[[ if ]] -- while\nx = \"or\"", *lua) == 3);
    }
}

TEST_SUITE("measure_commit") {
    TEST_CASE("markup under cc falls back to word distance") {
        CommitRecord r;
        r.commit_id = "m1";
        r.files.push_back(text_change("index.html", "<p>hi</p>", "<p>bye</p>"));
        const auto m = measure_commit(r, MetricKind::CyclomaticDelta, ProfileRegistry::builtin());
        REQUIRE(m.per_file.size() == 1);
        CHECK(m.per_file[0].effective_metric == MetricKind::LevenshteinWords);
        CHECK(m.per_file[0].delta == 1.0);
        CHECK(m.fallback_applied);
        CHECK(m.effective_metric == MetricKind::LevenshteinWords);
        CHECK(m.delta_l == 1.0);
    }

    TEST_CASE("empty commit") {
        CommitRecord r;
        r.commit_id = "e";
        for (auto k : {MetricKind::LocDelta, MetricKind::LevenshteinWords, MetricKind::CyclomaticDelta}) {
            const auto m = measure_commit(r, k, ProfileRegistry::builtin());
            CHECK(m.delta_l == 0.0);
            CHECK(m.per_file.empty());
            CHECK_FALSE(m.fallback_applied);
        }
    }

    TEST_CASE("additivity across files") {
        CommitRecord r;
        r.commit_id = "two";
        r.files.push_back(text_change("a.c", "int f;", "if(a){} if(b){}"));                // 3 - 1 = 2
        r.files.push_back(text_change("b.c", std::nullopt, "if(a && b){} while(c){}"));     // 4 - 0 = 4
        r.files.push_back(text_change("c.c", "x", "y"));
        const auto m = measure_commit(r, MetricKind::CyclomaticDelta, ProfileRegistry::builtin());
        REQUIRE(m.per_file.size() == 3);
        CHECK(m.per_file[0].delta == 2.0);
        CHECK(m.per_file[1].delta == 4.0);
        CHECK(m.per_file[2].delta == 0.0);
        CHECK(m.delta_l == 6.0);
        CHECK_FALSE(m.fallback_applied);
        CHECK(m.effective_metric == MetricKind::CyclomaticDelta);

        std::reverse(r.files.begin(), r.files.end());
        CHECK(measure_commit(r, MetricKind::CyclomaticDelta, ProfileRegistry::builtin()).delta_l == 6.0);
    }

    TEST_CASE("mixed files keep per-file provenance") {
        CommitRecord r;
        r.commit_id = "mix";
        r.files.push_back(text_change("a.c", std::nullopt, "if(x){}"));
        r.files.push_back(text_change("README.md", "old words here", "new words here"));
        FileChange bin;
        bin.path = "img.png";
        bin.is_binary = true;
        r.files.push_back(bin);
        const auto m = measure_commit(r, MetricKind::CyclomaticDelta, ProfileRegistry::builtin());
        REQUIRE(m.per_file.size() == 2);
        CHECK(m.binary_files == 1);
        CHECK(m.per_file[0].effective_metric == MetricKind::CyclomaticDelta);
        CHECK(m.per_file[1].effective_metric == MetricKind::LevenshteinWords);
        CHECK(m.fallback_applied);
        CHECK(m.effective_metric == MetricKind::CyclomaticDelta);
        CHECK(m.delta_l == 3.0);
    }

    TEST_CASE("loc and lev apply directly, deletions treat the missing side as empty") {
        CommitRecord r;
        r.commit_id = "d";
        r.files.push_back(text_change("gone.c", "a b\nc\n", std::nullopt));
        CHECK(measure_commit(r, MetricKind::LocDelta, ProfileRegistry::builtin()).delta_l == 2.0);
        CHECK(measure_commit(r, MetricKind::LevenshteinWords, ProfileRegistry::builtin()).delta_l == 3.0);
        CHECK(measure_commit(r, MetricKind::CyclomaticDelta, ProfileRegistry::builtin()).delta_l == 1.0);
    }

    TEST_CASE("oversized files are measured by line diff") {
        CommitRecord r;
        r.commit_id = "big";
        r.files.push_back(text_change("big.c", "a\nb\n", "a\nb\nc d e\n"));
        const auto m = measure_commit(r, MetricKind::LevenshteinWords, ProfileRegistry::builtin(), MeasureOptions{4});
        REQUIRE(m.per_file.size() == 1);
        CHECK(m.per_file[0].effective_metric == MetricKind::LocDelta);
        CHECK(m.per_file[0].size_fallback);
        CHECK(m.size_fallback_applied);
        CHECK_FALSE(m.fallback_applied);
        CHECK(m.delta_l == 1.0);
    }

    TEST_CASE("merge commits are a contract violation") {
        CommitRecord r;
        r.commit_id = "merge";
        r.is_merge = true;
        CHECK_THROWS_AS((void)measure_commit(r, MetricKind::LocDelta, ProfileRegistry::builtin()), ContractViolation);
    }

    TEST_CASE("no cc on files lacking a complexity profile") {
        std::mt19937_64 rng(2);
        const std::vector<std::string> paths{"a.c", "b.py", "c.html", "d.unknown", "Makefile", "e.sh", "f.md"};
        for (int i = 0; i < 50; ++i) {
            CommitRecord r;
            r.commit_id = "p" + std::to_string(i);
            for (const auto& p : paths) {
                if (rng() % 2) r.files.push_back(text_change(p, "if x", "if y and z"));
            }
            const auto m = measure_commit(r, MetricKind::CyclomaticDelta, ProfileRegistry::builtin());
            double sum = 0.0;
            for (const auto& f : m.per_file) {
                sum += f.delta;
                const auto* prof = ProfileRegistry::builtin().find_by_path(f.path);
                if (prof == nullptr || !prof->supports_complexity()) {
                    CHECK(f.effective_metric != MetricKind::CyclomaticDelta);
                }
            }
            CHECK(sum == m.delta_l);
        }
    }
}

TEST_CASE("metric names round-trip") {
    for (auto k : {MetricKind::LocDelta, MetricKind::LevenshteinWords, MetricKind::CyclomaticDelta}) {
        CHECK(parse_metric(metric_name(k)) == k);
    }
    CHECK(parse_metric("CYCLOMATIC_DELTA") == MetricKind::CyclomaticDelta);
    CHECK_THROWS_AS((void)parse_metric("words"), InputError);
}

TEST_CASE("hand-counted complexity corpora") {
    const auto registry = ProfileRegistry::builtin();
    for (const char* name : {"c-like", "python", "shell"}) {
        const auto* profile = registry.find_by_name(name);
        REQUIRE(profile != nullptr);
        const auto cases =
            test::load_complexity_cases(std::filesystem::path(CRIM_FIXTURE_DIR) / "complexity" / (std::string(name) + ".txt"));
        CHECK(cases.size() >= 20);
        for (const auto& c : cases) {
            INFO(name << ": " << c.label);
            CHECK(cyclomatic_complexity(c.source, *profile) == c.expected);
        }
    }
}
