#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "kbqa/cli/config.hpp"

namespace kbqa::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything needed to re-run a command: its name, the tool version, the
/// seed, the full config with a digest, and SHA-256 digests of every input
/// and output file. Deliberately timestamp-free so identical runs write
/// byte-identical manifests.
nlohmann::ordered_json build_manifest(const std::string& command, const RunConfig& config,
                                      const std::vector<std::filesystem::path>& inputs,
                                      const std::vector<std::filesystem::path>& outputs);

/// Serializes build_manifest to <output_dir>/manifest.json.
void write_manifest(const std::filesystem::path& output_dir, const std::string& command,
                    const RunConfig& config, const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs);

}  // namespace kbqa::cli
