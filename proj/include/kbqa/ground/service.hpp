#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "kbqa/ground/snapshot.hpp"
#include "kbqa/sparql/ast.hpp"

namespace kbqa::ground {

/// Base class for failures while talking to a query backend.
class EndpointError : public std::runtime_error {
  public:
    explicit EndpointError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Connection-level failure (refused, reset, timeout). Retryable.
class TransportError : public EndpointError {
  public:
    explicit TransportError(const std::string& msg) : EndpointError(msg) {}
};

/// The server answered with a non-success HTTP status.
class EndpointStatusError : public EndpointError {
  public:
    EndpointStatusError(int status, const std::string& msg)
        : EndpointError(msg), status_(status) {}
    int status() const { return status_; }

  private:
    int status_;
};

/// The server answered 200 but the body is not a result document we accept.
class MalformedResponseError : public EndpointError {
  public:
    explicit MalformedResponseError(const std::string& msg) : EndpointError(msg) {}
};

/// Uniform facade over anything that can answer queries and label lookups;
/// backed either by a local snapshot or a live HTTP endpoint.
class QueryService {
  public:
    virtual ~QueryService() = default;

    /// Executes a concrete Wikidata-dialect query.
    virtual QueryResult execute(const sparql::Query& q) = 0;

    /// Label of an entity in one language; nullopt when the backend has none.
    virtual std::optional<std::string> label(const std::string& qcode,
                                             const std::string& lang) = 0;
};

/// QueryService over an in-memory snapshot; answers are fully deterministic.
class SnapshotService final : public QueryService {
  public:
    explicit SnapshotService(TripleStoreSnapshot snapshot, std::size_t max_steps = 10'000'000)
        : snapshot_(std::move(snapshot)), max_steps_(max_steps) {}

    QueryResult execute(const sparql::Query& q) override {
        return evaluate_local(snapshot_, q, max_steps_);
    }

    std::optional<std::string> label(const std::string& qcode, const std::string& lang) override {
        return snapshot_.label(qcode, lang);
    }

    const TripleStoreSnapshot& snapshot() const { return snapshot_; }

  private:
    TripleStoreSnapshot snapshot_;
    std::size_t max_steps_;
};

}  // namespace kbqa::ground
