#include "crim/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crim/errors.hpp"
#include "process.hpp"

namespace crim {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kStage = "ingest";

std::string trim(std::string_view s) {
    const auto is_space = [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); };
    while (!s.empty() && is_space(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && is_space(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

[[noreturn]] void fail_line(const std::string& what, std::size_t line) {
    throw InputError(std::string(kStage), what + ", line " + std::to_string(line));
}

const json& require(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail_line(std::string("missing field '") + key + "'", line);
    return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_string()) fail_line(std::string(key) + " not a string", line);
    return v.get<std::string>();
}

bool require_bool(const json& obj, const char* key, std::size_t line) {
    const json& v = require(obj, key, line);
    if (!v.is_boolean()) fail_line(std::string(key) + " not a boolean", line);
    return v.get<bool>();
}

std::optional<std::string> optional_text(const json& obj, const char* key, std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail_line(std::string(key) + " not a string or null", line);
    return it->get<std::string>();
}

FileChange parse_file(const json& f, std::size_t line) {
    if (!f.is_object()) fail_line("files entry not an object", line);
    FileChange fc;
    fc.path = require_string(f, "path", line);
    fc.before = optional_text(f, "before", line);
    fc.after = optional_text(f, "after", line);
    if (const auto it = f.find("is_binary"); it != f.end()) {
        if (!it->is_boolean()) fail_line("is_binary not a boolean", line);
        fc.is_binary = it->get<bool>();
    }
    if (fc.is_binary && (fc.before || fc.after)) {
        fail_line("binary file '" + fc.path + "' carries content", line);
    }
    if (!fc.is_binary && !fc.before && !fc.after) {
        fail_line("file '" + fc.path + "' has neither before nor after content", line);
    }
    return fc;
}

CommitRecord parse_record(const json& obj, std::size_t line) {
    if (!obj.is_object()) fail_line("record not a JSON object", line);
    CommitRecord r;
    r.commit_id = require_string(obj, "id", line);
    if (r.commit_id.empty()) fail_line("id is empty", line);
    r.author_name = require_string(obj, "author_name", line);
    r.author_email = require_string(obj, "author_email", line);
    const json& ts = require(obj, "timestamp", line);
    if (!ts.is_number_integer()) fail_line("timestamp not an integer", line);
    r.timestamp = ts.get<Timestamp>();
    if (ts.is_number_unsigned() && ts.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        fail_line("timestamp out of range", line);
    }
    if (r.timestamp < 0) fail_line("timestamp negative", line);
    r.is_merge = require_bool(obj, "is_merge", line);
    const json& files = require(obj, "files", line);
    if (!files.is_array()) fail_line("files not an array", line);
    r.files.reserve(files.size());
    for (const auto& f : files) r.files.push_back(parse_file(f, line));
    return r;
}

}  // namespace

std::string normalize_email(std::string_view email) {
    std::string out = trim(email);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    });
    return out;
}

// --- IdentityMap -----------------------------------------------------------

void IdentityMap::add(std::string name, std::string email, std::string author_id) {
    if (author_id.empty()) throw InputError(std::string(kStage), "identity map: empty author id");
    auto key = std::make_pair(std::move(name), std::move(email));
    const auto [it, inserted] = by_pair_.emplace(key, author_id);
    if (!inserted && it->second != author_id) {
        throw InputError(std::string(kStage), "identity map: (" + key.first + ", " + key.second +
                                                  ") maps to both '" + it->second + "' and '" +
                                                  author_id + "'");
    }
}

void IdentityMap::add_email(std::string email, std::string author_id) {
    if (author_id.empty()) throw InputError(std::string(kStage), "identity map: empty author id");
    auto key = normalize_email(email);
    const auto [it, inserted] = by_email_.emplace(key, author_id);
    if (!inserted && it->second != author_id) {
        throw InputError(std::string(kStage), "identity map: email '" + key + "' maps to both '" +
                                                  it->second + "' and '" + author_id + "'");
    }
}

std::optional<std::string> IdentityMap::lookup(std::string_view name, std::string_view email) const {
    if (const auto it = by_pair_.find({std::string(name), std::string(email)}); it != by_pair_.end()) {
        return it->second;
    }
    if (const auto it = by_email_.find(normalize_email(email)); it != by_email_.end()) {
        return it->second;
    }
    return std::nullopt;
}

IdentityMap IdentityMap::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string(kStage), std::string("identity map: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError(std::string(kStage), "identity map: expected a JSON object");
    IdentityMap map;
    if (const auto it = doc.find("emails"); it != doc.end()) {
        if (!it->is_object()) throw InputError(std::string(kStage), "identity map: 'emails' not an object");
        for (const auto& [email, id] : it->items()) {
            if (!id.is_string()) throw InputError(std::string(kStage), "identity map: id for '" + email + "' not a string");
            map.add_email(email, id.get<std::string>());
        }
    }
    if (const auto it = doc.find("identities"); it != doc.end()) {
        if (!it->is_array()) throw InputError(std::string(kStage), "identity map: 'identities' not an array");
        for (const auto& e : *it) {
            if (!e.is_object() || !e.contains("name") || !e.contains("email") || !e.contains("id") ||
                !e["name"].is_string() || !e["email"].is_string() || !e["id"].is_string()) {
                throw InputError(std::string(kStage), "identity map: identities entries need string name, email, id");
            }
            map.add(e["name"].get<std::string>(), e["email"].get<std::string>(), e["id"].get<std::string>());
        }
    }
    return map;
}

IdentityMap IdentityMap::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError(std::string(kStage), "cannot read identity map '" + file.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

// --- JSONL -----------------------------------------------------------------

std::vector<CommitRecord> parse_jsonl(std::istream& in) {
    std::vector<CommitRecord> records;
    std::set<std::string, std::less<>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            fail_line(std::string("malformed JSON (") + e.what() + ")", line_no);
        }
        CommitRecord r = parse_record(obj, line_no);
        if (!seen.insert(r.commit_id).second) fail_line("duplicate commit_id '" + r.commit_id + "'", line_no);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<CommitRecord> parse_jsonl(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_jsonl(in);
}

std::string render_jsonl(std::span<const CommitRecord> records) {
    std::string out;
    for (const auto& r : records) {
        ordered_json obj;
        obj["id"] = r.commit_id;
        obj["author_name"] = r.author_name;
        obj["author_email"] = r.author_email;
        obj["timestamp"] = r.timestamp;
        obj["is_merge"] = r.is_merge;
        auto files = ordered_json::array();
        for (const auto& f : r.files) {
            ordered_json fo;
            fo["path"] = f.path;
            fo["before"] = f.before ? ordered_json(*f.before) : ordered_json(nullptr);
            fo["after"] = f.after ? ordered_json(*f.after) : ordered_json(nullptr);
            fo["is_binary"] = f.is_binary;
            files.push_back(std::move(fo));
        }
        obj["files"] = std::move(files);
        out += obj.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

// --- record transforms -----------------------------------------------------

std::vector<CommitRecord> resolve_authors(std::vector<CommitRecord> records, const IdentityMap& map) {
    for (auto& r : records) {
        if (auto id = map.lookup(r.author_name, r.author_email)) {
            r.author_id = std::move(*id);
        } else {
            r.author_id = normalize_email(r.author_email);
        }
        // An empty email still needs a usable identity.
        if (r.author_id.empty()) r.author_id = r.author_name.empty() ? "<unknown>" : r.author_name;
    }
    return records;
}

std::vector<CommitRecord> order_commits(std::vector<CommitRecord> records) {
    std::stable_sort(records.begin(), records.end(), [](const CommitRecord& a, const CommitRecord& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        return a.commit_id < b.commit_id;
    });
    return records;
}

std::vector<CommitRecord> filter_window(std::vector<CommitRecord> records, GitWindow window) {
    std::erase_if(records, [&](const CommitRecord& r) {
        return (window.since && r.timestamp < *window.since) || (window.until && r.timestamp > *window.until);
    });
    return records;
}

// --- content decoding ------------------------------------------------------

bool looks_binary(std::string_view bytes) noexcept {
    return bytes.substr(0, 8000).find('\0') != std::string_view::npos;
}

std::string sanitize_utf8(std::string_view bytes) {
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(bytes.size());
    std::size_t i = 0;
    const std::size_t n = bytes.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(bytes[i]);
        std::size_t len = 0;
        std::uint32_t min_cp = 0;
        if (c < 0x80) {
            out += static_cast<char>(c);
            ++i;
            continue;
        } else if (c >= 0xC2 && c <= 0xDF) {
            len = 2;
            min_cp = 0x80;
        } else if (c >= 0xE0 && c <= 0xEF) {
            len = 3;
            min_cp = 0x800;
        } else if (c >= 0xF0 && c <= 0xF4) {
            len = 4;
            min_cp = 0x10000;
        }
        bool ok = len != 0 && i + len <= n;
        std::uint32_t cp = len == 2 ? (c & 0x1F) : len == 3 ? (c & 0x0F) : (c & 0x07);
        for (std::size_t k = 1; ok && k < len; ++k) {
            const auto cc = static_cast<unsigned char>(bytes[i + k]);
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (ok && (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) ok = false;
        if (ok) {
            out.append(bytes.substr(i, len));
            i += len;
        } else {
            out += kReplacement;
            ++i;
            // Skip the continuation bytes of this broken sequence.
            while (i < n && (static_cast<unsigned char>(bytes[i]) & 0xC0) == 0x80) ++i;
        }
    }
    return out;
}

// --- git adapter -----------------------------------------------------------

namespace {

constexpr std::string_view kZeroSha = "0000000000000000000000000000000000000000";

std::string git_or_throw(const std::filesystem::path& repo, std::vector<std::string> args) {
    std::vector<std::string> argv{"git", "-C", repo.string()};
    argv.insert(argv.end(), std::make_move_iterator(args.begin()), std::make_move_iterator(args.end()));
    detail::ProcessResult res;
    try {
        res = detail::run_process(argv);
    } catch (const EnvironmentError& e) {
        throw EnvironmentError(std::string(kStage), std::string("git executable unavailable: ") + e.what());
    }
    if (res.exit_code != 0) {
        std::string cmd;
        for (std::size_t i = 3; i < argv.size() && i < 6; ++i) cmd += (cmd.empty() ? "" : " ") + argv[i];
        throw InputError(std::string(kStage), "git " + cmd + " failed (exit " + std::to_string(res.exit_code) +
                                                  "): " + trim(res.err));
    }
    return std::move(res.out);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

struct RawBlob {
    bool present = false;
    bool binary = false;
    std::string text;
};

RawBlob read_blob(const std::filesystem::path& repo, std::string_view sha) {
    RawBlob b;
    if (sha == kZeroSha) return b;
    b.present = true;
    std::string bytes = git_or_throw(repo, {"cat-file", "blob", std::string(sha)});
    if (looks_binary(bytes)) {
        b.binary = true;
    } else {
        b.text = sanitize_utf8(bytes);
    }
    return b;
}

std::vector<FileChange> changed_files(const std::filesystem::path& repo, const std::string& sha) {
    const std::string raw =
        git_or_throw(repo, {"diff-tree", "-r", "-z", "--no-commit-id", "--no-renames", "--root", sha});
    std::vector<FileChange> files;
    auto fields = split(raw, '\0');
    for (std::size_t i = 0; i + 1 < fields.size(); i += 2) {
        const std::string_view meta = fields[i];
        const std::string_view path = fields[i + 1];
        if (meta.empty() || meta.front() != ':') {
            throw InputError(std::string(kStage), "unexpected git diff-tree output for " + sha);
        }
        // ":<old mode> <new mode> <old sha> <new sha> <status>"
        auto parts = split(meta.substr(1), ' ');
        if (parts.size() < 5) throw InputError(std::string(kStage), "unexpected git diff-tree entry for " + sha);
        if (parts[0] == "160000" || parts[1] == "160000") continue;  // submodule
        RawBlob before = read_blob(repo, parts[2]);
        RawBlob after = read_blob(repo, parts[3]);
        FileChange fc;
        fc.path = std::string(path);
        if (before.binary || after.binary) {
            fc.is_binary = true;
        } else {
            if (before.present) fc.before = std::move(before.text);
            if (after.present) fc.after = std::move(after.text);
            if (!fc.before && !fc.after) continue;
        }
        files.push_back(std::move(fc));
    }
    std::sort(files.begin(), files.end(), [](const FileChange& a, const FileChange& b) { return a.path < b.path; });
    return files;
}

}  // namespace

std::vector<CommitRecord> collect_from_git(const std::filesystem::path& repo, GitWindow window) {
    std::error_code ec;
    if (!std::filesystem::is_directory(repo, ec)) {
        throw InputError(std::string(kStage), "repository path '" + repo.string() + "' is not a readable directory");
    }
    git_or_throw(repo, {"rev-parse", "--git-dir"});

    const std::string log = git_or_throw(
        repo, {"log", "--date=unix", "--topo-order", "--format=tformat:%H%x00%P%x00%an%x00%ae%x00%at%x1e"});

    std::vector<CommitRecord> records;
    for (std::string_view entry : split(log, '\x1e')) {
        while (!entry.empty() && (entry.front() == '\n' || entry.front() == '\r')) entry.remove_prefix(1);
        if (entry.empty()) continue;
        const auto f = split(entry, '\0');
        if (f.size() != 5) throw InputError(std::string(kStage), "unexpected git log record");
        CommitRecord r;
        r.commit_id = std::string(f[0]);
        const auto parents = f[1].empty() ? 0 : split(f[1], ' ').size();
        r.author_name = sanitize_utf8(f[2]);
        r.author_email = sanitize_utf8(f[3]);
        try {
            r.timestamp = std::stoll(std::string(f[4]));
        } catch (const std::exception&) {
            throw InputError(std::string(kStage), "bad author timestamp for " + r.commit_id);
        }
        if ((window.since && r.timestamp < *window.since) || (window.until && r.timestamp > *window.until)) continue;
        r.is_merge = parents > 1;
        if (!r.is_merge) r.files = changed_files(repo, r.commit_id);
        records.push_back(std::move(r));
    }
    return order_commits(std::move(records));
}

}  // namespace crim
