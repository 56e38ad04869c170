#include "kbqa/sparql/ast.hpp"

#include <algorithm>
#include <cctype>

#include "kbqa/util.hpp"

namespace kbqa::sparql {

using util::ValidationError;

namespace {

bool code_shaped(std::string_view text, char head) {
    if (text.size() < 2 || text[0] != head) return false;
    for (std::size_t i = 1; i < text.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    return true;
}

}  // namespace

bool is_qcode(std::string_view text) { return code_shaped(text, 'Q'); }

bool is_pcode(std::string_view text) { return code_shaped(text, 'P'); }

bool is_mid_text(std::string_view text) {
    if (text.size() < 3 || text.substr(0, 2) != "m.") return false;
    for (std::size_t i = 2; i < text.size(); ++i) {
        char c = text[i];
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    }
    return true;
}

bool is_dotted_property(std::string_view text) {
    if (text.empty() || text.front() == '.' || text.back() == '.') return false;
    bool prev_dot = false;
    for (char c : text) {
        if (c == '.') {
            if (prev_dot) return false;
            prev_dot = true;
            continue;
        }
        prev_dot = false;
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    }
    return true;
}

bool is_placeholder_surface(std::string_view text) {
    if (text.size() < 2 || text[0] != 'M') return false;
    for (std::size_t i = 1; i < text.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return false;
    return true;
}

Term make_variable(std::string name) { return {Term::Kind::Variable, std::move(name)}; }
Term make_placeholder(std::string surface) { return {Term::Kind::Placeholder, std::move(surface)}; }
Term make_mid(std::string id) { return {Term::Kind::FreebaseMid, std::move(id)}; }
Term make_entity(std::string qcode) { return {Term::Kind::WikidataEntity, std::move(qcode)}; }
Term make_property(std::string pcode) { return {Term::Kind::WikidataProperty, std::move(pcode)}; }
Term make_freebase_property(std::string dotted) {
    return {Term::Kind::FreebaseProperty, std::move(dotted)};
}

std::string to_string(const Term& t) {
    switch (t.kind) {
        case Term::Kind::Variable: return "?" + t.text;
        case Term::Kind::Placeholder: return t.text;
        case Term::Kind::FreebaseMid: return "ns:" + t.text;
        case Term::Kind::WikidataEntity: return "wd:" + t.text;
        case Term::Kind::WikidataProperty: return "wdt:" + t.text;
        case Term::Kind::FreebaseProperty: return "ns:" + t.text;
    }
    return t.text;
}

namespace {

std::string serialize_predicate(const std::variant<PropertyPath, UnaryTypeAssertion>& pred) {
    if (const auto* unary = std::get_if<UnaryTypeAssertion>(&pred)) {
        return "a " + to_string(unary->class_term);
    }
    const auto& path = std::get<PropertyPath>(pred);
    std::string out;
    for (std::size_t i = 0; i < path.steps.size(); ++i) {
        if (i > 0) out += "/";
        if (path.steps[i].reversed) out += "^";
        out += to_string(path.steps[i].property);
    }
    return out;
}

std::string serialize_triple(const TriplePattern& t) {
    std::string out = to_string(t.subject) + " " + serialize_predicate(t.predicate);
    if (t.object) out += " " + to_string(*t.object);
    return out;
}

std::string serialize_filter(const FilterClause& f) {
    return "FILTER ( " + to_string(f.left) + " != " + to_string(f.right) + " )";
}

bool is_entity_like(const Term& t) {
    return t.kind == Term::Kind::WikidataEntity || t.kind == Term::Kind::FreebaseMid ||
           t.kind == Term::Kind::Placeholder;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

}  // namespace

std::string serialize_query(const Query& q) {
    std::string out;
    switch (q.form) {
        case QueryForm::SelectCount: out = "SELECT count(*) WHERE "; break;
        case QueryForm::Ask: out = "ASK WHERE "; break;
        case QueryForm::Select: {
            out = "SELECT ";
            if (q.distinct) out += "DISTINCT ";
            for (const auto& v : q.projected) out += to_string(v) + " ";
            out += "WHERE ";
            break;
        }
    }
    std::vector<std::string> items;
    items.reserve(q.triples.size() + q.filters.size());
    for (const auto& t : q.triples) items.push_back(serialize_triple(t));
    for (const auto& f : q.filters) items.push_back(serialize_filter(f));
    if (items.empty()) {
        out += "{ }";
    } else {
        out += "{ " + util::join(items, " . ") + " }";
    }
    if (!q.order_by.empty()) {
        out += " ORDER BY";
        for (const auto& v : q.order_by) out += " " + to_string(v);
    }
    if (q.limit) out += " LIMIT " + std::to_string(*q.limit);
    return out;
}

void check_query(const Query& q) {
    switch (q.form) {
        case QueryForm::SelectCount:
            require(q.dialect == Dialect::Freebase, "SELECT count(*) is Freebase-only");
            require(q.projected.empty() && !q.distinct, "count(*) carries no projection");
            break;
        case QueryForm::Ask:
            require(q.dialect == Dialect::Wikidata, "ASK is Wikidata-only");
            require(q.projected.empty() && !q.distinct, "ASK carries no projection");
            break;
        case QueryForm::Select:
            require(!q.projected.empty(), "SELECT requires at least one projected variable");
            for (const auto& v : q.projected)
                require(v.kind == Term::Kind::Variable, "projection must be variables");
            break;
    }
    for (const auto& t : q.triples) {
        const bool unary = std::holds_alternative<UnaryTypeAssertion>(t.predicate);
        require(t.object.has_value() != unary, "object present iff predicate is a path");
        require(t.subject.kind == Term::Kind::Variable || is_entity_like(t.subject),
                "triple subject must be a variable, entity, or placeholder");
        if (t.object)
            require(t.object->kind == Term::Kind::Variable || is_entity_like(*t.object),
                    "triple object must be a variable, entity, or placeholder");
        if (q.dialect == Dialect::Wikidata) {
            require(!unary, "unary type assertions are Freebase-only");
            const auto& path = std::get<PropertyPath>(t.predicate);
            require(path.steps.size() == 1, "multi-step paths are Freebase-only");
            require(!path.steps[0].reversed, "reverse marks are Freebase-only");
            require(path.steps[0].property.kind == Term::Kind::WikidataProperty,
                    "Wikidata predicates use wdt: codes");
            require(t.subject.kind != Term::Kind::FreebaseMid, "MID in Wikidata query");
            require(!t.object || t.object->kind != Term::Kind::FreebaseMid,
                    "MID in Wikidata query");
        } else {
            if (unary) {
                require(std::get<UnaryTypeAssertion>(t.predicate).class_term.kind ==
                            Term::Kind::FreebaseProperty,
                        "type assertion class must be a dotted name");
            } else {
                const auto& path = std::get<PropertyPath>(t.predicate);
                require(!path.steps.empty(), "empty property path");
                for (const auto& s : path.steps)
                    require(s.property.kind == Term::Kind::FreebaseProperty,
                            "Freebase predicates use ns: dotted names");
            }
            require(t.subject.kind != Term::Kind::WikidataEntity, "Q-code in Freebase query");
            require(!t.object || t.object->kind != Term::Kind::WikidataEntity,
                    "Q-code in Freebase query");
        }
    }
    for (const auto& f : q.filters) {
        require(!(f.left == f.right), "filter compares a term to itself");
        require(f.left.kind == Term::Kind::Variable || is_entity_like(f.left),
                "filter operand must be a variable, entity, or placeholder");
        require(f.right.kind == Term::Kind::Variable || is_entity_like(f.right),
                "filter operand must be a variable, entity, or placeholder");
        if (q.dialect == Dialect::Wikidata) {
            require(f.left.kind != Term::Kind::FreebaseMid &&
                        f.right.kind != Term::Kind::FreebaseMid,
                    "MID in Wikidata filter");
        }
    }
    for (const auto& v : q.order_by)
        require(v.kind == Term::Kind::Variable, "ORDER BY takes variables");
    if (q.limit) require(*q.limit > 0, "LIMIT must be positive");
}

std::multiset<std::string> extract_properties(const Query& q) {
    if (q.dialect != Dialect::Wikidata)
        throw DialectError("extract_properties expects a Wikidata-dialect query");
    std::multiset<std::string> out;
    for (const auto& t : q.triples) {
        const auto& path = std::get<PropertyPath>(t.predicate);
        for (const auto& s : path.steps) out.insert(s.property.text);
    }
    return out;
}

std::multiset<std::string> extract_entities(const Query& q) {
    if (q.dialect != Dialect::Wikidata)
        throw DialectError("extract_entities expects a Wikidata-dialect query");
    std::multiset<std::string> out;
    for (const auto& t : q.triples) {
        if (is_entity_like(t.subject)) out.insert(t.subject.text);
        if (t.object && is_entity_like(*t.object)) out.insert(t.object->text);
    }
    return out;
}

namespace {

/// Applies fn to every term position of q in a fixed order: triples
/// (subject, object), then filters (left, right).
template <typename Fn>
void for_each_term(Query& q, Fn&& fn) {
    for (auto& t : q.triples) {
        fn(t.subject);
        if (t.object) fn(*t.object);
    }
    for (auto& f : q.filters) {
        fn(f.left);
        fn(f.right);
    }
}

}  // namespace

std::vector<std::string> placeholders_in(const Query& q) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    Query copy = q;
    for_each_term(copy, [&](Term& t) {
        if (t.kind == Term::Kind::Placeholder && seen.insert(t.text).second)
            out.push_back(t.text);
    });
    return out;
}

ModEntitiesResult mod_entities(const Query& q, const std::set<std::string>& special_qcodes,
                               const std::map<std::string, std::string>& preferred_labels) {
    if (q.dialect != Dialect::Wikidata)
        throw DialectError("mod_entities expects a Wikidata-dialect query");
    ModEntitiesResult result;
    result.pattern = q;
    std::map<std::string, std::string> assigned;
    std::set<std::string> used;
    for (const auto& [qcode, label] : preferred_labels) used.insert(label);
    int next_fresh = 0;
    for_each_term(result.pattern, [&](Term& t) {
        if (t.kind != Term::Kind::WikidataEntity || special_qcodes.count(t.text)) return;
        auto it = assigned.find(t.text);
        if (it == assigned.end()) {
            std::string label;
            auto pref = preferred_labels.find(t.text);
            if (pref != preferred_labels.end()) {
                label = pref->second;
            } else {
                while (used.count("M" + std::to_string(next_fresh))) ++next_fresh;
                label = "M" + std::to_string(next_fresh);
                used.insert(label);
            }
            it = assigned.emplace(t.text, label).first;
            result.bindings.emplace_back(label, t);
        }
        t = make_placeholder(it->second);
    });
    return result;
}

Query bind_placeholders(const Query& pattern, const std::map<std::string, Term>& binding) {
    Query out = pattern;
    for_each_term(out, [&](Term& t) {
        if (t.kind != Term::Kind::Placeholder) return;
        auto it = binding.find(t.text);
        if (it != binding.end()) t = it->second;
    });
    return out;
}

namespace {

void match_terms(const Term& pat, const Term& conc, std::map<std::string, Term>& binding) {
    if (pat.kind == Term::Kind::Placeholder) {
        auto [it, inserted] = binding.emplace(pat.text, conc);
        if (!inserted && !(it->second == conc))
            throw ValidationError("placeholder " + pat.text + " bound to two different terms");
        return;
    }
    if (!(pat == conc))
        throw ValidationError("pattern and query disagree at " + to_string(pat) + " vs " +
                              to_string(conc));
}

}  // namespace

std::map<std::string, Term> infer_binding(const Query& pattern, const Query& concrete) {
    require(pattern.form == concrete.form && pattern.distinct == concrete.distinct &&
                pattern.projected == concrete.projected && pattern.dialect == concrete.dialect,
            "pattern and query have different shapes");
    require(pattern.triples.size() == concrete.triples.size() &&
                pattern.filters.size() == concrete.filters.size(),
            "pattern and query have different sizes");
    std::map<std::string, Term> binding;
    for (std::size_t i = 0; i < pattern.triples.size(); ++i) {
        const auto& pt = pattern.triples[i];
        const auto& ct = concrete.triples[i];
        require(pt.predicate == ct.predicate, "pattern and query predicates differ");
        require(pt.object.has_value() == ct.object.has_value(),
                "pattern and query triple shapes differ");
        match_terms(pt.subject, ct.subject, binding);
        if (pt.object) match_terms(*pt.object, *ct.object, binding);
    }
    for (std::size_t i = 0; i < pattern.filters.size(); ++i) {
        match_terms(pattern.filters[i].left, concrete.filters[i].left, binding);
        match_terms(pattern.filters[i].right, concrete.filters[i].right, binding);
    }
    return binding;
}

Query normalized(const Query& q) {
    Query out = q;
    std::sort(out.triples.begin(), out.triples.end(),
              [](const TriplePattern& a, const TriplePattern& b) {
                  return serialize_triple(a) < serialize_triple(b);
              });
    std::sort(out.filters.begin(), out.filters.end(),
              [](const FilterClause& a, const FilterClause& b) {
                  return serialize_filter(a) < serialize_filter(b);
              });
    return out;
}

}  // namespace kbqa::sparql
