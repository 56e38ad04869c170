#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kbqa/ground/service.hpp"
#include "kbqa/sparql/ast.hpp"

namespace kbqa::ground {

/// A pattern prepared for grounding: the probe swaps each placeholder for a
/// fresh ?v variable in order of first appearance, projects exactly those
/// variables, keeps the pattern's substituted filters, appends pairwise
/// distinctness filters not already implied, and caps at LIMIT 1. A pattern
/// without placeholders keeps its body untouched; only the form changes.
struct GroundingQuery {
    sparql::Query base_pattern;
    sparql::Query probe;
    std::vector<std::string> placeholder_order;  ///< index i corresponds to ?vi
};

/// deterministic adds ORDER BY over the introduced variables so any
/// conforming endpoint returns the same first row.
GroundingQuery build_grounding_query(const sparql::Query& pattern, bool deterministic = false);

/// A satisfying assignment: placeholders to entities, plus whatever labels
/// were fetched for those entities (qcode, then language, to label text).
struct Binding {
    std::vector<std::pair<std::string, std::string>> assignments;
    std::map<std::string, std::map<std::string, std::string>> labels;

    std::optional<std::string> entity_for(const std::string& placeholder) const;
    /// The assignment as term bindings, for bind_placeholders.
    std::map<std::string, sparql::Term> as_terms() const;
};

/// Probes the pattern and returns its first satisfying assignment, with
/// labels for each assigned entity in each requested language (absent
/// labels are simply not recorded). nullopt when nothing satisfies the
/// pattern.
std::optional<Binding> ground_pattern(const sparql::Query& pattern, QueryService& service,
                                      const std::vector<std::string>& languages,
                                      bool deterministic = false);

/// Replaces each placeholder occurrence in the question text with the bound
/// entity's bracketed label, e.g. M0 to "[Lohengrin]". Placeholders are 'M'
/// plus a maximal digit run, matched anywhere in the text so unspaced
/// scripts work. Throws ValidationError when a placeholder has no
/// assignment or its entity has no label in the language.
std::string realize_question(const std::string& pattern_text, const Binding& binding,
                             const std::string& lang);

/// Entities observed in object position, keyed by the predicate in front of
/// them; the donor pool for negative sampling.
struct PredicatePools {
    std::map<std::string, std::vector<std::string>> by_property;

    void add(const std::string& pcode, const std::string& qcode);
    /// Sorted, deduplicated candidates for one property.
    const std::vector<std::string>& pool(const std::string& pcode) const;
};

/// Collects object-position entities of each predicate across a corpus of
/// concrete queries.
PredicatePools build_predicate_pools(const std::vector<sparql::Query>& concrete_queries);

/// A yes/no query flipped to a no: one placeholder-bound object entity was
/// swapped for a pool-mate of the same predicate and the endpoint confirmed
/// the result is false.
struct NegativeSample {
    sparql::Query query;
    std::string placeholder;
    std::string original_entity;
    std::string replacement_entity;
};

/// Tries pool-mates in seeded random order, at most max_attempts ASK probes,
/// and returns the first swap the service reports false. nullopt means
/// exhausted: either no candidate exists or none probed false within the
/// budget.
std::optional<NegativeSample> negative_sample(const sparql::Query& concrete,
                                              const sparql::Query& pattern,
                                              const PredicatePools& pools, QueryService& service,
                                              std::mt19937_64& rng, std::size_t max_attempts);

}  // namespace kbqa::ground
