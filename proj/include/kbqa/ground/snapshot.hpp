#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbqa/sparql/ast.hpp"

namespace kbqa::ground {

/// One fact: all three positions are bare codes (Q..., P..., Q...).
struct Triple {
    std::string subject;
    std::string property;
    std::string object;

    auto operator<=>(const Triple&) const = default;
};

/// Raised when local evaluation would enumerate past its step budget.
class CapacityError : public std::runtime_error {
  public:
    explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Result of executing a query: a boolean for ASK, otherwise rows mapping
/// projected variable names (without '?') to values.
struct QueryResult {
    bool is_boolean = false;
    bool boolean = false;
    std::vector<std::map<std::string, std::string>> rows;
};

/// In-memory triple store used as a local stand-in for a live endpoint.
/// Read-only after construction; holds per-language entity labels alongside
/// the graph.
class TripleStoreSnapshot {
  public:
    /// Triples file: `subject<TAB>property<TAB>object` rows; labels file:
    /// `qcode<TAB>lang<TAB>label` rows. '#' lines are comments.
    static TripleStoreSnapshot load(const std::filesystem::path& triples_path,
                                    const std::filesystem::path& labels_path);

    /// Throws ValidationError on a duplicate triple or malformed code.
    void add(Triple t);
    void add_label(const std::string& qcode, const std::string& lang, std::string text);

    bool contains(const Triple& t) const { return triples_.count(t) != 0; }
    std::size_t size() const { return triples_.size(); }
    const std::set<Triple>& triples() const { return triples_; }

    std::optional<std::string> label(const std::string& qcode, const std::string& lang) const;

    /// Every entity appearing in subject or object position, sorted.
    std::vector<std::string> entities() const;

  private:
    std::set<Triple> triples_;
    std::map<std::string, std::map<std::string, std::string>> labels_;
};

/// Evaluates a concrete Wikidata-dialect query against the snapshot by
/// backtracking over the triple patterns in order, pruning with inequality
/// filters as soon as both operands are bound. SELECT rows come out in
/// enumeration order, deduplicated under DISTINCT, sorted by the ORDER BY
/// variables when present, and truncated to LIMIT. Throws ValidationError on
/// placeholders or unbound projected variables, CapacityError past max_steps.
QueryResult evaluate_local(const TripleStoreSnapshot& snapshot, const sparql::Query& q,
                           std::size_t max_steps = 10'000'000);

}  // namespace kbqa::ground
