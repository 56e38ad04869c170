#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <string>

#include "kbqa/ground/service.hpp"

namespace kbqa::ground {

/// Connection settings for a SPARQL HTTP endpoint.
struct EndpointConfig {
    std::string url;                    ///< e.g. "http://localhost:8089/sparql"
    double requests_per_second = 5.0;   ///< token pace across all threads
    int max_inflight = 2;               ///< concurrent requests ceiling
    int timeout_seconds = 30;
    int retries = 2;                    ///< extra attempts after a transport failure
};

/// QueryService over the SPARQL protocol: GET with a `query` parameter,
/// JSON results. Requests are paced to requests_per_second and capped at
/// max_inflight in flight; transport failures are retried with backoff,
/// status and parse failures are not.
class HttpEndpoint final : public QueryService {
  public:
    explicit HttpEndpoint(EndpointConfig config);

    QueryResult execute(const sparql::Query& q) override;
    std::optional<std::string> label(const std::string& qcode, const std::string& lang) override;

    /// Parses a results document (exposed for tests). Throws
    /// MalformedResponseError when the body is not a boolean or bindings
    /// document.
    static QueryResult parse_results(const std::string& body);

  private:
    std::string fetch(const std::string& query_text);
    void pace();

    EndpointConfig config_;
    std::string scheme_host_;  ///< "http://host:port"
    std::string path_;         ///< "/sparql"

    std::mutex pace_mutex_;
    std::chrono::steady_clock::time_point next_slot_{};

    std::mutex inflight_mutex_;
    std::condition_variable inflight_cv_;
    int inflight_ = 0;
};

}  // namespace kbqa::ground
