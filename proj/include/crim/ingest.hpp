#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace crim {

using Timestamp = std::int64_t;  // seconds since the Unix epoch, UTC

struct FileChange {
    std::string path;
    std::optional<std::string> before;  // absent: file created
    std::optional<std::string> after;   // absent: file deleted
    bool is_binary = false;

    friend bool operator==(const FileChange&, const FileChange&) = default;
};

struct CommitRecord {
    std::string commit_id;
    std::string author_name;
    std::string author_email;
    std::string author_id;  // empty until resolve_authors
    Timestamp timestamp = 0;
    bool is_merge = false;
    std::vector<FileChange> files;

    friend bool operator==(const CommitRecord&, const CommitRecord&) = default;
};

/// Maps raw author identities onto canonical developer ids. Lookups try the
/// exact (name, email) pair first, then the email alone. Email-only keys are
/// compared after normalization (trimmed, lowercased).
class IdentityMap {
public:
    /// Throws InputError when the key is already mapped to a different id or
    /// the id is empty.
    void add(std::string name, std::string email, std::string author_id);
    void add_email(std::string email, std::string author_id);

    [[nodiscard]] std::optional<std::string> lookup(std::string_view name,
                                                    std::string_view email) const;
    [[nodiscard]] bool empty() const noexcept { return by_pair_.empty() && by_email_.empty(); }

    /// Reads the JSON identity-map file:
    ///   {"emails": {"b@y": "dev-b"},
    ///    "identities": [{"name": "B", "email": "b@y", "id": "dev-b"}]}
    static IdentityMap from_json(std::string_view text);
    static IdentityMap load(const std::filesystem::path& file);

private:
    std::map<std::pair<std::string, std::string>, std::string> by_pair_;
    std::map<std::string, std::string> by_email_;
};

/// Lowercased, whitespace-trimmed email: the default author identity.
[[nodiscard]] std::string normalize_email(std::string_view email);

/// Parses the JSONL commit export. Errors name the offending line.
[[nodiscard]] std::vector<CommitRecord> parse_jsonl(std::istream& in);
[[nodiscard]] std::vector<CommitRecord> parse_jsonl(std::string_view text);

/// Inverse of parse_jsonl: one JSON object per line, LF terminated.
[[nodiscard]] std::string render_jsonl(std::span<const CommitRecord> records);

struct GitWindow {
    std::optional<Timestamp> since;  // inclusive
    std::optional<Timestamp> until;  // inclusive
};

/// Reads commits from a local git repository by shelling out to git.
/// Merge commits are returned flagged with no file changes. Output is
/// ordered by (timestamp, commit_id).
[[nodiscard]] std::vector<CommitRecord> collect_from_git(const std::filesystem::path& repo,
                                                         GitWindow window = {});

/// Sets author_id on every record; input order is preserved.
[[nodiscard]] std::vector<CommitRecord> resolve_authors(std::vector<CommitRecord> records,
                                                        const IdentityMap& map);

/// Stable sort by (timestamp, commit_id).
[[nodiscard]] std::vector<CommitRecord> order_commits(std::vector<CommitRecord> records);

/// Keeps records whose timestamp lies in the window.
[[nodiscard]] std::vector<CommitRecord> filter_window(std::vector<CommitRecord> records,
                                                      GitWindow window);

/// True when a NUL byte occurs within the first 8000 bytes.
[[nodiscard]] bool looks_binary(std::string_view bytes) noexcept;

/// Decodes bytes as UTF-8, replacing each invalid sequence with U+FFFD.
[[nodiscard]] std::string sanitize_utf8(std::string_view bytes);

}  // namespace crim
