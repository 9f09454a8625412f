#include <doctest.h>

#include <algorithm>
#include <random>

#include "crim/errors.hpp"
#include "crim/ingest.hpp"
#include "support/git_fixture.hpp"

using namespace crim;

namespace {

CommitRecord rec(std::string id, Timestamp ts, std::string email = "a@x") {
    CommitRecord r;
    r.commit_id = std::move(id);
    r.author_name = "A";
    r.author_email = std::move(email);
    r.timestamp = ts;
    return r;
}

std::string error_of(std::string_view text) {
    try {
        (void)parse_jsonl(text);
    } catch (const InputError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("parse_jsonl") {
    TEST_CASE("one valid line") {
        const auto r = parse_jsonl(
            R"({"id":"c1","author_name":"A","author_email":"a@x","timestamp":1000,"is_merge":false,"files":[]})");
        REQUIRE(r.size() == 1);
        CHECK(r[0].commit_id == "c1");
        CHECK(r[0].timestamp == 1000);
        CHECK(r[0].files.empty());
        CHECK_FALSE(r[0].is_merge);
        CHECK(r[0].author_id.empty());
    }

    TEST_CASE("empty stream and blank lines") {
        CHECK(parse_jsonl("").empty());
        CHECK(parse_jsonl("\n  \n").empty());
    }

    TEST_CASE("type violation names field and line") {
        CHECK(error_of(R"({"id":"c1","author_name":"A","author_email":"a@x","timestamp":"soon","is_merge":false,"files":[]})") ==
              "timestamp not an integer, line 1");
    }

    TEST_CASE("malformed json names the line") {
        const std::string two_lines =
            R"({"id":"c1","author_name":"A","author_email":"a@x","timestamp":1,"is_merge":false,"files":[]})"
            "\n{not json\n";
        const auto msg = error_of(two_lines);
        CHECK(msg.find("malformed JSON") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }

    TEST_CASE("missing field names the field") {
        const auto msg = error_of(R"({"id":"c1","author_name":"A","timestamp":1,"is_merge":false,"files":[]})");
        CHECK(msg == "missing field 'author_email', line 1");
    }

    TEST_CASE("duplicate commit id") {
        const std::string line =
            R"({"id":"c1","author_name":"A","author_email":"a@x","timestamp":1,"is_merge":false,"files":[]})";
        CHECK(error_of(line + "\n" + line).find("duplicate commit_id 'c1', line 2") != std::string::npos);
    }

    TEST_CASE("negative timestamp and empty id are rejected") {
        CHECK(error_of(R"({"id":"c1","author_name":"A","author_email":"a@x","timestamp":-5,"is_merge":false,"files":[]})") ==
              "timestamp negative, line 1");
        CHECK(error_of(R"({"id":"","author_name":"A","author_email":"a@x","timestamp":5,"is_merge":false,"files":[]})") ==
              "id is empty, line 1");
    }

    TEST_CASE("file change invariants") {
        CHECK(error_of(R"({"id":"c","author_name":"A","author_email":"a","timestamp":1,"is_merge":false,)"
                       R"("files":[{"path":"x.png","before":"abc","after":null,"is_binary":true}]})")
                  .find("carries content") != std::string::npos);
        CHECK(error_of(R"({"id":"c","author_name":"A","author_email":"a","timestamp":1,"is_merge":false,)"
                       R"("files":[{"path":"x.c","before":null,"after":null,"is_binary":false}]})")
                  .find("neither before nor after") != std::string::npos);
    }

    TEST_CASE("unknown keys ignored, nulls become absent content") {
        const auto r = parse_jsonl(
            R"({"id":"c","author_name":"A","author_email":"a","timestamp":1,"is_merge":true,"extra":[1,2],)"
            R"("files":[{"path":"n.c","before":null,"after":"int x;","is_binary":false,"mode":"100644"}]})");
        REQUIRE(r.size() == 1);
        CHECK(r[0].is_merge);
        REQUIRE(r[0].files.size() == 1);
        CHECK_FALSE(r[0].files[0].before.has_value());
        CHECK(r[0].files[0].after == "int x;");
    }
}

TEST_CASE("render_jsonl then parse_jsonl is the identity on random histories") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> texts{"", "x", "line one\nline two\n", "tab\there \"quoted\" \\ back", "ünïcødé ✓"};
    for (int round = 0; round < 50; ++round) {
        std::vector<CommitRecord> records;
        const int n = static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            CommitRecord r = rec("c" + std::to_string(round) + "_" + std::to_string(i), static_cast<Timestamp>(rng() % 100000),
                                 "e" + std::to_string(rng() % 3) + "@x");
            r.is_merge = rng() % 5 == 0;
            const int files = static_cast<int>(rng() % 4);
            for (int f = 0; f < files; ++f) {
                FileChange fc;
                fc.path = "dir/f" + std::to_string(f) + ".c";
                const auto kind = rng() % 4;
                if (kind == 0) {
                    fc.is_binary = true;
                } else {
                    if (kind != 1) fc.before = texts[rng() % texts.size()];
                    if (kind != 2) fc.after = texts[rng() % texts.size()];
                }
                r.files.push_back(std::move(fc));
            }
            records.push_back(std::move(r));
        }
        CHECK(parse_jsonl(render_jsonl(records)) == records);
    }
}

TEST_SUITE("resolve_authors") {
    TEST_CASE("default identity is the normalized email") {
        std::vector<CommitRecord> rs{rec("1", 1, "A@X.com"), rec("2", 2, "  a@x.com ")};
        const auto out = resolve_authors(rs, IdentityMap{});
        CHECK(out[0].author_id == "a@x.com");
        CHECK(out[1].author_id == "a@x.com");
    }

    TEST_CASE("email-only entries merge aliases") {
        IdentityMap map;
        map.add_email("b@y", "dev-b");
        map.add_email("b@corp", "dev-b");
        std::vector<CommitRecord> rs{rec("1", 1, "b@y"), rec("2", 2, "b@corp"), rec("3", 3, "c@z")};
        const auto out = resolve_authors(rs, map);
        CHECK(out[0].author_id == "dev-b");
        CHECK(out[1].author_id == "dev-b");
        CHECK(out[2].author_id == "c@z");
    }

    TEST_CASE("(name, email) entries take precedence over email-only") {
        IdentityMap map;
        map.add("A", "a@x", "pair-id");
        map.add_email("a@x", "email-id");
        const auto out = resolve_authors({rec("1", 1, "a@x")}, map);
        CHECK(out[0].author_id == "pair-id");
    }

    TEST_CASE("identity map is a function") {
        IdentityMap map;
        map.add_email("a@x", "one");
        CHECK_NOTHROW(map.add_email("A@X", "one"));
        CHECK_THROWS_AS(map.add_email("a@x", "two"), InputError);
        CHECK_THROWS_AS(map.add_email("z@x", ""), InputError);
    }

    TEST_CASE("identity map JSON") {
        const auto map = IdentityMap::from_json(
            R"({"emails":{"b@y":"dev-b"},"identities":[{"name":"Bee","email":"bee@home","id":"dev-b"}]})");
        CHECK(map.lookup("Bee", "bee@home") == std::optional<std::string>("dev-b"));
        CHECK(map.lookup("Other", "B@Y") == std::optional<std::string>("dev-b"));
        CHECK_FALSE(map.lookup("Other", "bee@home").has_value());
        CHECK_THROWS_AS(IdentityMap::from_json("[1]"), InputError);
    }

    TEST_CASE("count preserved and ids never empty") {
        std::vector<CommitRecord> rs{rec("1", 1, ""), rec("2", 2, "x@y")};
        rs[0].author_name = "";
        const auto out = resolve_authors(rs, IdentityMap{});
        REQUIRE(out.size() == rs.size());
        for (const auto& r : out) CHECK_FALSE(r.author_id.empty());
    }
}

TEST_SUITE("order_commits") {
    TEST_CASE("sorts by timestamp then id") {
        const auto out = order_commits({rec("b", 5), rec("a", 5), rec("z", 1)});
        REQUIRE(out.size() == 3);
        CHECK(out[0].commit_id == "z");
        CHECK(out[1].commit_id == "a");
        CHECK(out[2].commit_id == "b");
        CHECK(order_commits({}).empty());
    }

    TEST_CASE("idempotent permutation") {
        std::mt19937_64 rng(3);
        for (int round = 0; round < 100; ++round) {
            std::vector<CommitRecord> rs;
            for (int i = 0; i < 12; ++i) rs.push_back(rec("c" + std::to_string(rng() % 50), static_cast<Timestamp>(rng() % 6)));
            const auto once = order_commits(rs);
            CHECK(order_commits(once) == once);
            auto ids_in = rs;
            auto ids_out = once;
            const auto by_id = [](const CommitRecord& a, const CommitRecord& b) {
                return std::tie(a.commit_id, a.timestamp) < std::tie(b.commit_id, b.timestamp);
            };
            std::sort(ids_in.begin(), ids_in.end(), by_id);
            std::sort(ids_out.begin(), ids_out.end(), by_id);
            CHECK(ids_in == ids_out);
        }
    }
}

TEST_CASE("filter_window is inclusive") {
    const auto out = filter_window({rec("a", 1), rec("b", 5), rec("c", 10)}, GitWindow{5, 10});
    REQUIRE(out.size() == 2);
    CHECK(out[0].commit_id == "b");
}

TEST_CASE("binary detection and utf-8 sanitizing") {
    CHECK(looks_binary(std::string("ab\0cd", 5)));
    CHECK_FALSE(looks_binary("plain text"));
    std::string late(9000, 'a');
    late[8500] = '\0';
    CHECK_FALSE(looks_binary(late));

    CHECK(sanitize_utf8("héllo") == "héllo");
    CHECK(sanitize_utf8("a\xFF" "b") == "a\xEF\xBF\xBD" "b");
    CHECK(sanitize_utf8("\xC3") == "\xEF\xBF\xBD");
    CHECK(sanitize_utf8("\xED\xA0\x80") == "\xEF\xBF\xBD");  // surrogate
}

TEST_SUITE("collect_from_git") {
    TEST_CASE("nonexistent path is an input error") {
        CHECK_THROWS_AS((void)collect_from_git("/nonexistent/crim/repo"), InputError);
    }

    TEST_CASE("directory that is not a repository") {
        if (!test::git_available()) return;
        test::TempDir dir("crim-norepo");
        CHECK_THROWS_AS((void)collect_from_git(dir.path()), InputError);
    }

    TEST_CASE("two commits by one author") {
        if (!test::git_available()) {
            MESSAGE("git not available; skipped");
            return;
        }
        test::TempDir dir("crim-git2");
        test::GitFixture repo(dir.path());
        repo.write("main.c", "int main() { return 0; }\n");
        repo.write("logo.bin", std::string("\x89PNG\0\0\x01", 7));
        repo.commit("Ann", "ann@example.com", 1'600'000'000, "first %H %x00 tricky");
        repo.write("main.c", "int main() {\n  if (1) return 1;\n  return 0;\n}\n");
        repo.remove("logo.bin");
        repo.commit("Ann", "ann@example.com", 1'600'003'600, "second");

        const auto records = collect_from_git(dir.path());
        REQUIRE(records.size() == 2);
        CHECK(records[0].timestamp == 1'600'000'000);
        CHECK(records[1].timestamp == 1'600'003'600);
        CHECK(records[0].author_email == "ann@example.com");
        REQUIRE(records[0].files.size() == 2);
        CHECK(records[0].files[0].path == "logo.bin");
        CHECK(records[0].files[0].is_binary);
        CHECK_FALSE(records[0].files[0].after.has_value());
        CHECK(records[0].files[1].path == "main.c");
        CHECK_FALSE(records[0].files[1].before.has_value());
        CHECK(records[0].files[1].after == "int main() { return 0; }\n");
        REQUIRE(records[1].files.size() == 2);
        CHECK(records[1].files[0].is_binary);
        CHECK(records[1].files[1].before == "int main() { return 0; }\n");

        const auto windowed = collect_from_git(dir.path(), GitWindow{1'600'000'001, std::nullopt});
        REQUIRE(windowed.size() == 1);
        CHECK(windowed[0].timestamp == 1'600'003'600);
    }

    TEST_CASE("merge commits are flagged with no files") {
        if (!test::git_available()) return;
        test::TempDir dir("crim-gitmerge");
        test::GitFixture repo(dir.path());
        repo.write("a.txt", "base\n");
        repo.commit("Ann", "ann@example.com", 1000, "base");
        repo.checkout("-b side");
        repo.write("b.txt", "side work\n");
        repo.commit("Bob", "bob@example.com", 2000, "side");
        repo.checkout("main");
        repo.merge("side", "Ann", "ann@example.com", 3000);

        const auto records = collect_from_git(dir.path());
        REQUIRE(records.size() == 3);
        CHECK_FALSE(records[0].is_merge);
        CHECK_FALSE(records[1].is_merge);
        CHECK(records[2].is_merge);
        CHECK(records[2].files.empty());
        CHECK(records[2].timestamp == 3000);

        // Byte-deterministic across runs.
        CHECK(render_jsonl(collect_from_git(dir.path())) == render_jsonl(records));
    }
}
