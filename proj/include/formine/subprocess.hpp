#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace formine {

struct RunResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string output;  // interleaved stdout + stderr
};

/// Runs argv[0] with the given arguments, working directory and wall-clock
/// timeout. stdin_data, when non-empty, is fed to the child. A timed-out
/// child is killed.
RunResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                      std::chrono::milliseconds timeout, const std::string& stdin_data = {});

/// PATH lookup (or direct check for paths containing '/').
bool program_exists(const std::string& name_or_path);

/// Splits a command template on spaces and substitutes {key} placeholders.
std::vector<std::string> split_command(const std::string& command_template,
                                       const std::vector<std::pair<std::string, std::string>>&
                                           substitutions);

}  // namespace formine
