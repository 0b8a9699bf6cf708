#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace autosd {

struct ProcessResult {
    int exit_code = -1;   // valid when !signaled && !timed_out
    bool signaled = false;
    bool timed_out = false;
    std::string stdout_text;
    std::string stderr_text;

    bool ok() const { return !signaled && !timed_out && exit_code == 0; }
};

/// Runs argv in its own process group with cwd as working directory.
/// The whole group is killed when the timeout elapses.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::chrono::milliseconds timeout);

/// Convenience wrapper running `/bin/sh -c command`.
ProcessResult run_shell(const std::string& command, const std::filesystem::path& cwd,
                        std::chrono::milliseconds timeout);

}  // namespace autosd
