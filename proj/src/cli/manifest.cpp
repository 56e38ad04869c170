#include "kbqa/cli/manifest.hpp"

#include "kbqa/digest.hpp"
#include "kbqa/util.hpp"

namespace kbqa::cli {

nlohmann::ordered_json build_manifest(const std::string& command, const RunConfig& config,
                                      const std::vector<std::filesystem::path>& inputs,
                                      const std::vector<std::filesystem::path>& outputs) {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["toolVersion"] = kToolVersion;
    m["seed"] = config.seed;
    m["config"] = config.to_json();
    m["configDigest"] = util::sha256_hex(m["config"].dump());

    // Inputs keep the path the user gave; outputs live in the run directory,
    // so their bare names suffice.
    auto ins = nlohmann::ordered_json::object();
    for (const auto& p : inputs) ins[p.generic_string()] = util::sha256_file(p);
    m["inputs"] = ins;
    auto outs = nlohmann::ordered_json::object();
    for (const auto& p : outputs) outs[p.filename().string()] = util::sha256_file(p);
    m["outputs"] = outs;
    return m;
}

void write_manifest(const std::filesystem::path& output_dir, const std::string& command,
                    const RunConfig& config, const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs) {
    util::write_file(output_dir / "manifest.json",
                     build_manifest(command, config, inputs, outputs).dump(2) + "\n");
}

}  // namespace kbqa::cli
