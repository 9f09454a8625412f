#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crim/ingest.hpp"

namespace crim {

/// Elapsed time between a commit and the same author's previous commit.
struct CommitTimeDelta {
    std::string commit_id;
    std::string author_id;
    std::optional<std::string> antecedent_id;
    std::optional<std::int64_t> ctd_seconds;  // absent iff antecedent_id is absent
};

/// One CTD per input record, in input order. Records must already be
/// ordered by (timestamp, commit_id), author-resolved and free of merges;
/// violations throw ContractViolation.
[[nodiscard]] std::vector<CommitTimeDelta> compute_ctds(std::span<const CommitRecord> records);

}  // namespace crim
