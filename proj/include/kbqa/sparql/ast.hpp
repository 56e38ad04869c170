#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kbqa::sparql {

/// Which query language flavor an AST belongs to. Freebase queries use
/// ns:-prefixed dotted properties and MIDs; Wikidata queries use wd:/wdt:
/// codes. Several constructs are legal in only one dialect.
enum class Dialect { Freebase, Wikidata };

/// Raised when an operation receives a query in the wrong dialect.
class DialectError : public std::runtime_error {
  public:
    explicit DialectError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A single RDF term. The text field holds the bare identifier without any
/// prefix: "x0" for ?x0, "M0", "m.05zppz", "Q6581097", "P57",
/// "film.actor.film".
struct Term {
    enum class Kind {
        Variable,
        Placeholder,
        FreebaseMid,
        WikidataEntity,
        WikidataProperty,
        FreebaseProperty,
    };

    Kind kind = Kind::Variable;
    std::string text;

    bool operator==(const Term&) const = default;
};

Term make_variable(std::string name);
Term make_placeholder(std::string surface);
Term make_mid(std::string id);
Term make_entity(std::string qcode);
Term make_property(std::string pcode);
Term make_freebase_property(std::string dotted);

/// Identifier shapes: Q6581097 / P57 / m.05zppz / film.actor.film / M0.
bool is_qcode(std::string_view text);
bool is_pcode(std::string_view text);
bool is_mid_text(std::string_view text);
bool is_dotted_property(std::string_view text);
bool is_placeholder_surface(std::string_view text);

/// Canonical surface form of a term: "?x0", "M0", "ns:m.05zppz",
/// "wd:Q6581097", "wdt:P57", "ns:film.actor.film".
std::string to_string(const Term& t);

/// One step of a property path. reversed corresponds to the ^ prefix and
/// occurs only in the Freebase dialect.
struct PathStep {
    Term property;
    bool reversed = false;

    bool operator==(const PathStep&) const = default;
};

/// A property path. Length >= 2 occurs only in the Freebase dialect
/// (e.g. ns:film.actor.film/ns:film.performance.character).
struct PropertyPath {
    std::vector<PathStep> steps;

    bool operator==(const PropertyPath&) const = default;
};

/// The Freebase-only surface form `?x1 a ns:film.director`, asserting class
/// membership. Has no object term.
struct UnaryTypeAssertion {
    Term class_term;

    bool operator==(const UnaryTypeAssertion&) const = default;
};

/// A triple pattern. object is empty exactly when the predicate is a
/// UnaryTypeAssertion.
struct TriplePattern {
    Term subject;
    std::variant<PropertyPath, UnaryTypeAssertion> predicate;
    std::optional<Term> object;

    bool operator==(const TriplePattern&) const = default;
};

/// FILTER ( left != right ). Inequality is the only relation in the subset.
struct FilterClause {
    Term left;
    Term right;

    bool operator==(const FilterClause&) const = default;
};

enum class QueryForm { SelectCount, Select, Ask };

/// A parsed query. Select covers both the DISTINCT form used by wh-
/// questions and the bare projection used by grounding probes. order_by is
/// only ever populated on probes that need a deterministic first row.
struct Query {
    QueryForm form = QueryForm::Ask;
    bool distinct = false;
    std::vector<Term> projected;
    std::vector<TriplePattern> triples;
    std::vector<FilterClause> filters;
    std::vector<Term> order_by;
    std::optional<long> limit;
    Dialect dialect = Dialect::Wikidata;

    bool operator==(const Query&) const = default;
};

/// Canonical serialization: single spaces between all tokens, body items
/// (triples, then filters) joined by " . ", filters as FILTER ( l != r ),
/// empty body as { }, then ORDER BY and LIMIT clauses when present.
/// serialize_query(parse_query(s, d)) == s for every canonical string s.
std::string serialize_query(const Query& q);

/// Checks the structural invariants of q for its declared dialect and throws
/// ValidationError with a description of the first violation. Wikidata
/// queries must not contain MIDs, dotted properties, unary assertions,
/// multi-step or reversed paths; SelectCount is Freebase-only and Ask is
/// Wikidata-only; filters must not compare a term to itself.
void check_query(const Query& q);

/// All property codes of a Wikidata-dialect query, one occurrence per path
/// step, order-insensitive. Throws DialectError on Freebase input.
std::multiset<std::string> extract_properties(const Query& q);

/// All entity occurrences (Q-codes and placeholders) in subject and object
/// positions of a Wikidata-dialect query. Variables and FILTER operands are
/// excluded. Throws DialectError on Freebase input.
std::multiset<std::string> extract_entities(const Query& q);

/// Placeholder surfaces in first-appearance order, scanning triples
/// (subject, object) then filters (left, right). Duplicates collapsed.
std::vector<std::string> placeholders_in(const Query& q);

/// Result of mod_entities: the anonymized pattern plus the substitution that
/// inverts it, in assignment order.
struct ModEntitiesResult {
    Query pattern;
    std::vector<std::pair<std::string, Term>> bindings;
};

/// Replaces each distinct non-special Q-code with a placeholder, numbering
/// fresh placeholders M0, M1, ... in first-appearance order. Entities listed
/// in special_qcodes stay in place. preferred_labels maps a Q-code to the
/// placeholder surface it carried in the source entry, so a re-derived
/// pattern reuses the original labels (M0/M2 rather than M0/M1 when M1 was
/// dropped upstream).
ModEntitiesResult mod_entities(const Query& q,
                               const std::set<std::string>& special_qcodes = {},
                               const std::map<std::string, std::string>& preferred_labels = {});

/// Substitutes bound terms for placeholders everywhere they occur, including
/// filter operands. Placeholders missing from the binding stay in place.
Query bind_placeholders(const Query& pattern, const std::map<std::string, Term>& binding);

/// Recovers the placeholder binding by walking a pattern and a concrete
/// query in lockstep. Throws ValidationError when the two differ anywhere
/// other than placeholder positions, or when one placeholder meets two
/// different terms.
std::map<std::string, Term> infer_binding(const Query& pattern, const Query& concrete);

/// Copy of q with triples and filters sorted by their canonical text.
/// Projection, form, and clauses are untouched. Used by the normalized
/// exact-match mode.
Query normalized(const Query& q);

}  // namespace kbqa::sparql
