#pragma once

#include <filesystem>

#include "kbqa/cli/config.hpp"

namespace kbqa::cli {

/// Required-setting helpers shared by the command implementations. The
/// output helper also creates the directory.
std::filesystem::path require_input_path(const RunConfig& config);
std::filesystem::path require_output_path(const RunConfig& config);

}  // namespace kbqa::cli
