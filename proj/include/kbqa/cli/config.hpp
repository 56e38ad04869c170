#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace kbqa::cli {

/// Raised for missing or contradictory command-line settings, as opposed to
/// bad data (ValidationError) or unreachable services (EndpointError).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Settings shared by the subcommands. Paths stay plain strings so a config
/// round-trips through the JSON manifest unchanged. Exactly one of endpoint
/// and snapshot may be set for commands that query a backend.
struct RunConfig {
    std::string input;                      ///< input file (JSON-lines)
    std::string output;                     ///< output directory
    std::string mapping;                    ///< property rule table (TSV)
    std::string specials;                   ///< special entity map (TSV)
    std::string endpoint;                   ///< SPARQL endpoint URL
    std::string snapshot;                   ///< local triple store (TSV)
    std::string labels;                     ///< entity labels for the snapshot (TSV)
    std::string predictions;                ///< model predictions (JSON-lines)
    std::vector<std::string> splits;        ///< source split files (JSON)
    std::vector<std::string> languages{"en"};
    std::uint64_t seed = 0;
    double rps = 5.0;                       ///< endpoint requests per second
    int max_inflight = 2;                   ///< concurrent requests / translation jobs
    int timeout = 30;                       ///< HTTP timeout, seconds
    bool deterministic = false;             ///< ORDER BY on grounding probes
    bool strict_coverage = false;           ///< uncovered gold entries count as wrong
    bool normalized = false;                ///< clause-order-insensitive exact match
    bool exclude_specials = false;          ///< drop special entities from error multisets
    double negatives = 0.0;                 ///< fraction of yes/no entries to flip
    std::size_t max_attempts = 10;          ///< probes per negative sampling try
    std::string translator = "identity";    ///< identity | dictionary | remote
    std::string dictionary;                 ///< phrase table for the dictionary client
    std::string mt_url;                     ///< remote translation service URL
    std::string mt_key_env = "KBQA_MT_API_KEY";  ///< env var holding the API key
    std::string replay_cache;               ///< translation replay cache path

    /// Flag-name-keyed view, embedded in manifests and hashed into the config
    /// digest. Credentials never appear: the key env var is recorded by name.
    nlohmann::ordered_json to_json() const;
};

}  // namespace kbqa::cli
