#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace crim::detail {

struct ProcessResult {
    int exit_code = 0;
    std::string out;
    std::string err;
};

/// Runs `argv[0]` (searched on PATH) with the given arguments and captures
/// both output streams. Throws EnvironmentError when the program cannot be
/// started at all.
ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& cwd = {});

}  // namespace crim::detail
