#include "kbqa/mapping/mapping.hpp"

#include "kbqa/util.hpp"

namespace kbqa::mapping {

namespace sparql = kbqa::sparql;
using sparql::Term;
using util::ValidationError;

void MappingTable::add(const std::string& freebase_property, MappingRule rule) {
    if (!rules_.emplace(freebase_property, std::move(rule)).second)
        throw ValidationError("duplicate mapping rule for " + freebase_property);
}

const MappingRule* MappingTable::find(const std::string& freebase_property) const {
    auto it = rules_.find(freebase_property);
    return it == rules_.end() ? nullptr : &it->second;
}

void SpecialEntityMap::add(const std::string& mid, Entry entry) {
    std::string slot = entry.category + "\t" + entry.qcode;
    if (entries_.count(mid)) throw ValidationError("duplicate special entity " + mid);
    if (!taken_.insert(slot).second)
        throw ValidationError("special entity map not injective: " + entry.qcode +
                              " appears twice in category " + entry.category);
    entries_.emplace(mid, std::move(entry));
}

const SpecialEntityMap::Entry* SpecialEntityMap::find(const std::string& mid) const {
    auto it = entries_.find(mid);
    return it == entries_.end() ? nullptr : &it->second;
}

std::set<std::string> SpecialEntityMap::special_qcodes() const {
    std::set<std::string> out;
    for (const auto& [mid, entry] : entries_) out.insert(entry.qcode);
    return out;
}

std::string reason_name(Rejection::Reason reason) {
    switch (reason) {
        case Rejection::Reason::ReverseMark: return "reverse_mark";
        case Rejection::Reason::UnmappedProperty: return "unmapped_property";
        case Rejection::Reason::UnsupportedForm: return "unsupported_form";
    }
    return "unknown";
}

namespace {

[[noreturn]] void bad_row(const std::filesystem::path& path, std::size_t line,
                          const std::string& msg) {
    throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + msg);
}

bool is_property_path(const std::string& text) {
    for (const auto& segment : util::split(text, '/'))
        if (!sparql::is_dotted_property(segment)) return false;
    return !text.empty();
}

}  // namespace

MappingTable load_mapping_table(const std::filesystem::path& path) {
    MappingTable table;
    for (const auto& row : util::read_tsv(path)) {
        if (row.fields.size() < 3 || row.fields.size() > 4)
            bad_row(path, row.line_number, "expected 3 or 4 columns");
        const std::string& prop = row.fields[0];
        const std::string& kind = row.fields[1];
        if (!is_property_path(prop))
            bad_row(path, row.line_number, "malformed Freebase property " + prop);
        MappingRule rule;
        if (kind == "direct" || kind == "reverse") {
            if (row.fields.size() != 3)
                bad_row(path, row.line_number, kind + " rows take exactly one argument");
            rule.kind = kind == "direct" ? MappingRule::Kind::Direct : MappingRule::Kind::Reverse;
            rule.target = row.fields[2];
            if (!sparql::is_pcode(rule.target))
                bad_row(path, row.line_number, "malformed P-code " + rule.target);
        } else if (kind == "unary") {
            if (row.fields.size() != 4)
                bad_row(path, row.line_number, "unary rows take a P-code and a Q-code");
            rule.kind = MappingRule::Kind::Unary;
            rule.target = row.fields[2];
            rule.class_entity = row.fields[3];
            if (!sparql::is_pcode(rule.target))
                bad_row(path, row.line_number, "malformed P-code " + rule.target);
            if (!sparql::is_qcode(rule.class_entity))
                bad_row(path, row.line_number, "malformed Q-code " + rule.class_entity);
        } else {
            bad_row(path, row.line_number, "unknown rule kind '" + kind + "'");
        }
        try {
            table.add(prop, std::move(rule));
        } catch (const ValidationError& e) {
            bad_row(path, row.line_number, e.what());
        }
    }
    return table;
}

SpecialEntityMap load_special_entities(const std::filesystem::path& path) {
    SpecialEntityMap map;
    for (const auto& row : util::read_tsv(path)) {
        if (row.fields.size() != 3)
            bad_row(path, row.line_number, "expected columns mid, qcode, category");
        const std::string& mid = row.fields[0];
        const std::string& qcode = row.fields[1];
        const std::string& category = row.fields[2];
        if (!sparql::is_mid_text(mid)) bad_row(path, row.line_number, "malformed MID " + mid);
        if (!sparql::is_qcode(qcode)) bad_row(path, row.line_number, "malformed Q-code " + qcode);
        if (category != "gender" && category != "nationality")
            bad_row(path, row.line_number, "unknown category '" + category + "'");
        try {
            map.add(mid, {qcode, category});
        } catch (const ValidationError& e) {
            bad_row(path, row.line_number, e.what());
        }
    }
    return map;
}

std::pair<MappingTable, SpecialEntityMap> load_mapping(
    const std::filesystem::path& mapping_path, const std::filesystem::path& specials_path) {
    return {load_mapping_table(mapping_path), load_special_entities(specials_path)};
}

namespace {

/// Migrates an entity-position term. Variables and placeholders pass
/// through; special MIDs become Q-codes; any other MID has no mapping.
std::variant<Term, Rejection> migrate_term(const Term& t, const SpecialEntityMap& specials) {
    if (t.kind != Term::Kind::FreebaseMid) return t;
    if (const auto* entry = specials.find(t.text)) return sparql::make_entity(entry->qcode);
    return Rejection{Rejection::Reason::UnmappedProperty,
                     "ns:" + t.text + " (entity outside the special map)"};
}

std::string full_path_string(const sparql::PropertyPath& path) {
    std::vector<std::string> segments;
    for (const auto& step : path.steps) segments.push_back(step.property.text);
    return util::join(segments, "/");
}

}  // namespace

TripleOutcome migrate_triple(const sparql::TriplePattern& t, const MappingTable& table,
                             const SpecialEntityMap& specials) {
    if (const auto* unary = std::get_if<sparql::UnaryTypeAssertion>(&t.predicate)) {
        const std::string& name = unary->class_term.text;
        const MappingRule* rule = table.find(name);
        if (!rule || rule->kind != MappingRule::Kind::Unary)
            return Rejection{Rejection::Reason::UnmappedProperty, name};
        sparql::TriplePattern out;
        out.subject = t.subject;  // unary subjects are variables, nothing to map
        out.predicate = sparql::PropertyPath{{{sparql::make_property(rule->target), false}}};
        out.object = sparql::make_entity(rule->class_entity);
        return std::vector<sparql::TriplePattern>{std::move(out)};
    }

    const auto& path = std::get<sparql::PropertyPath>(t.predicate);
    for (const auto& step : path.steps)
        if (step.reversed)
            return Rejection{Rejection::Reason::ReverseMark, step.property.text};
    const std::string name = full_path_string(path);
    const MappingRule* rule = table.find(name);
    if (!rule || rule->kind == MappingRule::Kind::Unary)
        return Rejection{Rejection::Reason::UnmappedProperty, name};

    auto subject = migrate_term(t.subject, specials);
    if (auto* rej = std::get_if<Rejection>(&subject)) return *rej;
    auto object = migrate_term(*t.object, specials);
    if (auto* rej = std::get_if<Rejection>(&object)) return *rej;

    sparql::TriplePattern out;
    out.predicate = sparql::PropertyPath{{{sparql::make_property(rule->target), false}}};
    if (rule->kind == MappingRule::Kind::Direct) {
        out.subject = std::get<Term>(subject);
        out.object = std::get<Term>(object);
    } else {  // Reverse: the target names the inverse property
        out.subject = std::get<Term>(object);
        out.object = std::get<Term>(subject);
    }
    return std::vector<sparql::TriplePattern>{std::move(out)};
}

MigrationOutcome migrate_query(const sparql::Query& q, const MappingTable& table,
                               const SpecialEntityMap& specials) {
    if (q.dialect != sparql::Dialect::Freebase)
        throw sparql::DialectError("migrate_query expects a Freebase-dialect query");

    sparql::Query out;
    out.dialect = sparql::Dialect::Wikidata;
    switch (q.form) {
        case sparql::QueryForm::SelectCount:
            out.form = sparql::QueryForm::Ask;  // count(*) is the yes/no form
            break;
        case sparql::QueryForm::Select:
            if (!q.distinct)
                return Rejection{Rejection::Reason::UnsupportedForm, "plain SELECT"};
            out.form = sparql::QueryForm::Select;
            out.distinct = true;
            out.projected = q.projected;
            break;
        default:
            return Rejection{Rejection::Reason::UnsupportedForm, "ASK"};
    }

    for (const auto& t : q.triples) {
        auto outcome = migrate_triple(t, table, specials);
        if (auto* rej = std::get_if<Rejection>(&outcome)) return *rej;
        for (auto& mt : std::get<std::vector<sparql::TriplePattern>>(outcome))
            out.triples.push_back(std::move(mt));
    }
    for (const auto& f : q.filters) {
        auto left = migrate_term(f.left, specials);
        if (auto* rej = std::get_if<Rejection>(&left)) return *rej;
        auto right = migrate_term(f.right, specials);
        if (auto* rej = std::get_if<Rejection>(&right)) return *rej;
        out.filters.push_back({std::get<Term>(left), std::get<Term>(right)});
    }
    out.order_by = q.order_by;
    out.limit = q.limit;
    sparql::check_query(out);
    return out;
}

double MigrationReport::survival_ratio() const {
    return total == 0 ? 1.0 : static_cast<double>(migrated) / static_cast<double>(total);
}

nlohmann::ordered_json MigrationReport::to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["migrated"] = migrated;
    j["survival_ratio"] = survival_ratio();
    j["rejections_by_reason"] = rejections_by_reason;
    j["rejections_by_detail"] = rejections_by_detail;
    return j;
}

MigrationReport migration_report(const std::vector<MigrationOutcome>& outcomes) {
    MigrationReport report;
    report.total = outcomes.size();
    for (const auto& outcome : outcomes) {
        if (std::holds_alternative<sparql::Query>(outcome)) {
            ++report.migrated;
            continue;
        }
        const auto& rej = std::get<Rejection>(outcome);
        ++report.rejections_by_reason[reason_name(rej.reason)];
        ++report.rejections_by_detail[rej.detail];
    }
    return report;
}

}  // namespace kbqa::mapping
