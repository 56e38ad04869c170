#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "kbqa/sparql/ast.hpp"

namespace kbqa::mapping {

/// How one Freebase property translates to Wikidata. Direct keeps the
/// subject/object order; Reverse targets the P-code of the inverse property,
/// so migration swaps the entities around it; Unary turns a class-membership
/// assertion into an ordinary triple (relation, class_entity).
struct MappingRule {
    enum class Kind { Direct, Reverse, Unary };

    Kind kind = Kind::Direct;
    std::string target;        // P-code
    std::string class_entity;  // Q-code, Unary only
};

/// Immutable after load. Keys are full Freebase property paths, dotted
/// segments joined by '/' (e.g. "film.actor.film/film.performance.character").
class MappingTable {
  public:
    /// Throws ValidationError when the property already has a rule.
    void add(const std::string& freebase_property, MappingRule rule);

    const MappingRule* find(const std::string& freebase_property) const;
    std::size_t size() const { return rules_.size(); }

  private:
    std::map<std::string, MappingRule> rules_;
};

/// MID to Q-code substitutions for the entities that stay inside query
/// patterns: genders and nationalities. Injective within each category.
class SpecialEntityMap {
  public:
    struct Entry {
        std::string qcode;
        std::string category;  // "gender" or "nationality"
    };

    void add(const std::string& mid, Entry entry);
    const Entry* find(const std::string& mid) const;
    std::size_t size() const { return entries_.size(); }

    /// The Q-code side, for mod_entities-style pattern derivation.
    std::set<std::string> special_qcodes() const;

  private:
    std::map<std::string, Entry> entries_;
    std::set<std::string> taken_;  // category + '\t' + qcode, for injectivity
};

/// Why a query (or one of its triples) could not be migrated.
struct Rejection {
    enum class Reason { ReverseMark, UnmappedProperty, UnsupportedForm };

    Reason reason = Reason::UnmappedProperty;
    std::string detail;  // offending property path, MID, or form name
};

std::string reason_name(Rejection::Reason reason);

/// Loads the rule table from TSV rows `freebase_property<TAB>kind<TAB>arg1
/// [<TAB>arg2]` with kind in {direct, reverse, unary}; unary rows carry the
/// relation P-code and the class Q-code. '#' lines are comments. Malformed
/// rows and duplicate keys raise ValidationError with the line number.
MappingTable load_mapping_table(const std::filesystem::path& path);

/// Loads special entities from TSV rows `mid<TAB>qcode<TAB>category`.
SpecialEntityMap load_special_entities(const std::filesystem::path& path);

/// Convenience: both files at once.
std::pair<MappingTable, SpecialEntityMap> load_mapping(
    const std::filesystem::path& mapping_path, const std::filesystem::path& specials_path);

using TripleOutcome = std::variant<std::vector<sparql::TriplePattern>, Rejection>;

/// Migrates one Freebase triple. Direct rules keep subject and object,
/// Reverse rules swap them, Unary rules rewrite `?x a C` into
/// (?x, relation, class_entity). Any reversed path step rejects with
/// ReverseMark; a property path without a rule for its full string rejects
/// with UnmappedProperty; so does a MID absent from the special map.
TripleOutcome migrate_triple(const sparql::TriplePattern& t, const MappingTable& table,
                             const SpecialEntityMap& specials);

using MigrationOutcome = std::variant<sparql::Query, Rejection>;

/// Migrates a whole query: every triple through migrate_triple (the first
/// rejection aborts), filters carried over with special MIDs substituted,
/// SELECT count(*) converted to ASK, SELECT DISTINCT preserved. Any other
/// form rejects with UnsupportedForm. The result satisfies every
/// Wikidata-dialect invariant. Throws DialectError unless q is Freebase.
MigrationOutcome migrate_query(const sparql::Query& q, const MappingTable& table,
                               const SpecialEntityMap& specials);

/// Aggregate counts over a batch of outcomes.
struct MigrationReport {
    std::size_t total = 0;
    std::size_t migrated = 0;
    std::map<std::string, std::size_t> rejections_by_reason;
    std::map<std::string, std::size_t> rejections_by_detail;

    /// migrated / total; an empty batch loses nothing and reports 1.0.
    double survival_ratio() const;

    nlohmann::ordered_json to_json() const;
};

MigrationReport migration_report(const std::vector<MigrationOutcome>& outcomes);

}  // namespace kbqa::mapping
