#include "kbqa/cli/config.hpp"

namespace kbqa::cli {

nlohmann::ordered_json RunConfig::to_json() const {
    nlohmann::ordered_json j;
    j["input"] = input;
    j["output"] = output;
    j["mapping"] = mapping;
    j["specials"] = specials;
    j["endpoint"] = endpoint;
    j["snapshot"] = snapshot;
    j["labels"] = labels;
    j["predictions"] = predictions;
    j["splits"] = splits;
    j["languages"] = languages;
    j["seed"] = seed;
    j["rps"] = rps;
    j["max-inflight"] = max_inflight;
    j["timeout"] = timeout;
    j["deterministic"] = deterministic;
    j["strict-coverage"] = strict_coverage;
    j["normalized"] = normalized;
    j["exclude-specials"] = exclude_specials;
    j["negatives"] = negatives;
    j["max-attempts"] = max_attempts;
    j["translator"] = translator;
    j["dictionary"] = dictionary;
    j["mt-url"] = mt_url;
    j["mt-key-env"] = mt_key_env;
    j["replay-cache"] = replay_cache;
    return j;
}

}  // namespace kbqa::cli
