#include "crim/timedelta.hpp"

#include <unordered_map>

#include "crim/errors.hpp"

namespace crim {

std::vector<CommitTimeDelta> compute_ctds(std::span<const CommitRecord> records) {
    struct Last {
        std::size_t index;
        Timestamp timestamp;
    };
    std::unordered_map<std::string, Last> last_by_author;
    std::vector<CommitTimeDelta> out;
    out.reserve(records.size());

    for (std::size_t i = 0; i < records.size(); ++i) {
        const CommitRecord& r = records[i];
        if (r.author_id.empty()) {
            throw ContractViolation("ctd", "commit " + r.commit_id + " has no resolved author_id");
        }
        if (r.is_merge) {
            throw ContractViolation("ctd", "merge commit " + r.commit_id + " must be filtered before CTD computation");
        }
        if (i > 0) {
            const CommitRecord& p = records[i - 1];
            if (p.timestamp > r.timestamp || (p.timestamp == r.timestamp && p.commit_id > r.commit_id)) {
                throw ContractViolation("ctd", "records not ordered by (timestamp, commit_id) at " + r.commit_id);
            }
        }

        CommitTimeDelta d{.commit_id = r.commit_id, .author_id = r.author_id, .antecedent_id = {}, .ctd_seconds = {}};
        auto [it, first] = last_by_author.try_emplace(r.author_id, Last{i, r.timestamp});
        if (!first) {
            d.antecedent_id = records[it->second.index].commit_id;
            d.ctd_seconds = r.timestamp - it->second.timestamp;
            it->second = Last{i, r.timestamp};
        }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace crim
