#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crim/errors.hpp"
#include "crim/metrics.hpp"

namespace crim {
namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    });
    return out;
}

std::vector<LanguageProfile> builtin_profiles() {
    LanguageProfile c_like{
        .name = "c-like",
        .extensions = {"c",  "h",   "cc", "cpp", "cxx", "hh",    "hpp", "hxx",   "ipp", "java", "js", "jsx",
                       "mjs", "cjs", "ts", "tsx", "cs",  "go",   "rs",  "kt",  "kts",  "swift", "scala", "dart"},
        .decision_tokens = {"if", "for", "foreach", "while", "case", "catch", "&&", "||", "?"},
        .function_tokens = {"function", "fn", "func"},
        .line_comments = {"//"},
        .block_comments = {{"/*", "*/"}},
        .string_delimiters = {"\"", "'", "`"},
    };
    LanguageProfile python{
        .name = "python",
        .extensions = {"py", "pyw", "pyi"},
        .decision_tokens = {"if", "elif", "for", "while", "except", "case", "and", "or"},
        .function_tokens = {"def", "lambda"},
        .line_comments = {"#"},
        .block_comments = {},
        .string_delimiters = {"\"\"\"", "'''", "\"", "'"},
    };
    LanguageProfile shell{
        .name = "shell",
        .extensions = {"sh", "bash", "zsh", "ksh"},
        .decision_tokens = {"if", "elif", "while", "until", "for", "select", ";;", "&&", "||"},
        .function_tokens = {"function"},
        .line_comments = {"#"},
        .block_comments = {},
        .string_delimiters = {"\"", "'"},
    };
    LanguageProfile markup{
        .name = "markup",
        .extensions = {"html", "htm", "xhtml", "xml", "svg", "md", "markdown", "rst", "txt", "css", "json",
                       "yaml", "yml", "toml"},
        .decision_tokens = {},
        .function_tokens = {},
        .line_comments = {},
        .block_comments = {{"<!--", "-->"}},
        .string_delimiters = {},
    };
    return {std::move(c_like), std::move(python), std::move(shell), std::move(markup)};
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& profile) {
    std::vector<std::string> out;
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return out;
    if (!it->is_array()) throw InputError("profiles", "profile '" + profile + "': '" + key + "' not an array");
    for (const auto& v : *it) {
        if (!v.is_string() || v.get<std::string>().empty()) {
            throw InputError("profiles", "profile '" + profile + "': '" + key + "' entries must be non-empty strings");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

}  // namespace

ProfileRegistry::ProfileRegistry(std::vector<LanguageProfile> profiles) : profiles_(std::move(profiles)) {
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
        for (auto& ext : profiles_[i].extensions) {
            ext = lower(ext);
            if (!ext.empty() && ext.front() == '.') ext.erase(0, 1);
            const auto [it, inserted] = by_extension_.emplace(ext, i);
            if (!inserted) {
                throw InputError("profiles", "extension '" + ext + "' claimed by both '" + profiles_[it->second].name +
                                                 "' and '" + profiles_[i].name + "'");
            }
        }
    }
}

const ProfileRegistry& ProfileRegistry::builtin() {
    static const ProfileRegistry registry(builtin_profiles());
    return registry;
}

ProfileRegistry ProfileRegistry::from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError("profiles", std::string("malformed profile JSON: ") + e.what());
    }
    const json* list = &doc;
    if (doc.is_object()) {
        const auto it = doc.find("profiles");
        if (it == doc.end()) throw InputError("profiles", "profile JSON lacks a 'profiles' array");
        list = &*it;
    }
    if (!list->is_array()) throw InputError("profiles", "'profiles' not an array");

    std::vector<LanguageProfile> profiles;
    for (const auto& p : *list) {
        if (!p.is_object() || !p.contains("name") || !p["name"].is_string()) {
            throw InputError("profiles", "each profile needs a string 'name'");
        }
        LanguageProfile lp;
        lp.name = p["name"].get<std::string>();
        lp.extensions = string_list(p, "extensions", lp.name);
        lp.decision_tokens = string_list(p, "decision_tokens", lp.name);
        lp.function_tokens = string_list(p, "function_tokens", lp.name);
        lp.string_delimiters = string_list(p, "string_delimiters", lp.name);
        if (const auto c = p.find("comments"); c != p.end() && !c->is_null()) {
            if (!c->is_object()) throw InputError("profiles", "profile '" + lp.name + "': 'comments' not an object");
            lp.line_comments = string_list(*c, "line", lp.name);
            if (const auto b = c->find("block"); b != c->end() && !b->is_null()) {
                if (!b->is_array()) throw InputError("profiles", "profile '" + lp.name + "': block comments not an array");
                for (const auto& pair : *b) {
                    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string() ||
                        pair[0].get<std::string>().empty() || pair[1].get<std::string>().empty()) {
                        throw InputError("profiles", "profile '" + lp.name + "': block comments are [open, close] pairs");
                    }
                    lp.block_comments.push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
                }
            }
        }
        profiles.push_back(std::move(lp));
    }
    return ProfileRegistry(std::move(profiles));
}

ProfileRegistry ProfileRegistry::load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("profiles", "cannot read profile file '" + file.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string ProfileRegistry::to_json() const {
    auto list = ordered_json::array();
    for (const auto& p : profiles_) {
        ordered_json o;
        o["name"] = p.name;
        o["extensions"] = p.extensions;
        o["decision_tokens"] = p.decision_tokens;
        o["function_tokens"] = p.function_tokens;
        auto blocks = ordered_json::array();
        for (const auto& b : p.block_comments) blocks.push_back({b.open, b.close});
        o["comments"] = {{"line", p.line_comments}, {"block", std::move(blocks)}};
        o["string_delimiters"] = p.string_delimiters;
        list.push_back(std::move(o));
    }
    ordered_json doc;
    doc["profiles"] = std::move(list);
    return doc.dump(2) + "\n";
}

const LanguageProfile* ProfileRegistry::find_by_path(std::string_view path) const {
    const auto slash = path.find_last_of('/');
    const std::string_view base = slash == std::string_view::npos ? path : path.substr(slash + 1);
    const auto dot = base.find_last_of('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 == base.size()) return nullptr;
    const auto it = by_extension_.find(lower(base.substr(dot + 1)));
    return it == by_extension_.end() ? nullptr : &profiles_[it->second];
}

const LanguageProfile* ProfileRegistry::find_by_name(std::string_view name) const {
    const auto it = std::find_if(profiles_.begin(), profiles_.end(), [&](const auto& p) { return p.name == name; });
    return it == profiles_.end() ? nullptr : &*it;
}

}  // namespace crim
