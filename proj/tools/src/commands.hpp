#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"

namespace ionmodes::cli {

struct CommandResult {
  std::string summary;
  std::vector<std::filesystem::path> outputs;
};

CommandResult run_surfaces(const RunConfig& config);
CommandResult run_spectrum(const RunConfig& config);
CommandResult run_exchange(const RunConfig& config);
CommandResult run_berry(const RunConfig& config);
CommandResult run_sweep(const RunConfig& config);
CommandResult run_fit_spectrum(const RunConfig& config);
CommandResult run_fit_fringes(const RunConfig& config);

// Writes to a sibling temporary file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace ionmodes::cli
