#include "kbqa/ground/grounding.hpp"

#include <algorithm>
#include <set>

#include "kbqa/util.hpp"

namespace kbqa::ground {

using sparql::Dialect;
using sparql::FilterClause;
using sparql::Query;
using sparql::QueryForm;
using sparql::Term;
using util::ValidationError;

GroundingQuery build_grounding_query(const Query& pattern, bool deterministic) {
    sparql::check_query(pattern);
    if (pattern.dialect != Dialect::Wikidata)
        throw sparql::DialectError("grounding expects a Wikidata-dialect pattern");

    GroundingQuery out;
    out.base_pattern = pattern;
    out.placeholder_order = sparql::placeholders_in(pattern);
    if (out.placeholder_order.empty()) {
        out.probe = pattern;
        return out;
    }

    // ?v names are reserved for the probe's projection.
    Query scan = pattern;
    for (const auto& t : scan.triples) {
        for (const Term* term : {&t.subject, t.object ? &*t.object : nullptr}) {
            if (term && term->kind == Term::Kind::Variable && term->text.size() > 1 &&
                term->text[0] == 'v' &&
                std::all_of(term->text.begin() + 1, term->text.end(),
                            [](char c) { return c >= '0' && c <= '9'; }))
                throw ValidationError("pattern uses reserved probe variable ?" + term->text);
        }
    }

    std::map<std::string, Term> to_variable;
    std::vector<Term> introduced;
    for (std::size_t i = 0; i < out.placeholder_order.size(); ++i) {
        Term v = sparql::make_variable("v" + std::to_string(i));
        to_variable.emplace(out.placeholder_order[i], v);
        introduced.push_back(std::move(v));
    }

    Query probe = sparql::bind_placeholders(pattern, to_variable);
    probe.form = QueryForm::Select;
    probe.distinct = false;
    probe.projected = introduced;

    // Distinctness among the introduced variables, skipping pairs the
    // carried filters already separate.
    std::set<std::pair<std::string, std::string>> separated;
    for (const auto& f : probe.filters) {
        if (f.left.kind == Term::Kind::Variable && f.right.kind == Term::Kind::Variable) {
            separated.emplace(f.left.text, f.right.text);
            separated.emplace(f.right.text, f.left.text);
        }
    }
    for (std::size_t i = 0; i < introduced.size(); ++i) {
        for (std::size_t j = i + 1; j < introduced.size(); ++j) {
            if (separated.count({introduced[i].text, introduced[j].text})) continue;
            probe.filters.push_back(FilterClause{introduced[i], introduced[j]});
        }
    }
    probe.order_by = deterministic ? introduced : std::vector<Term>{};
    probe.limit = 1;
    sparql::check_query(probe);
    out.probe = std::move(probe);
    return out;
}

std::optional<std::string> Binding::entity_for(const std::string& placeholder) const {
    for (const auto& [name, qcode] : assignments)
        if (name == placeholder) return qcode;
    return std::nullopt;
}

std::map<std::string, Term> Binding::as_terms() const {
    std::map<std::string, Term> out;
    for (const auto& [name, qcode] : assignments) out.emplace(name, sparql::make_entity(qcode));
    return out;
}

std::optional<Binding> ground_pattern(const Query& pattern, QueryService& service,
                                      const std::vector<std::string>& languages,
                                      bool deterministic) {
    auto gq = build_grounding_query(pattern, deterministic);
    auto result = service.execute(gq.probe);

    Binding binding;
    if (gq.placeholder_order.empty()) {
        const bool satisfied = result.is_boolean ? result.boolean : !result.rows.empty();
        if (!satisfied) return std::nullopt;
        return binding;
    }

    if (result.is_boolean)
        throw MalformedResponseError("probe answered with a boolean instead of rows");
    if (result.rows.empty()) return std::nullopt;
    const auto& row = result.rows.front();
    std::set<std::string> distinct_check;
    for (std::size_t i = 0; i < gq.placeholder_order.size(); ++i) {
        const std::string var = "v" + std::to_string(i);
        auto cell = row.find(var);
        if (cell == row.end())
            throw MalformedResponseError("probe row is missing ?" + var);
        if (!sparql::is_qcode(cell->second))
            throw MalformedResponseError("probe bound ?" + var + " to a non-entity value: " +
                                         cell->second);
        if (!distinct_check.insert(cell->second).second)
            throw ValidationError("probe row binds two placeholders to " + cell->second);
        binding.assignments.emplace_back(gq.placeholder_order[i], cell->second);
    }

    for (const auto& [placeholder, qcode] : binding.assignments) {
        (void)placeholder;
        if (binding.labels.count(qcode)) continue;
        auto& per_lang = binding.labels[qcode];
        for (const auto& lang : languages) {
            auto text = service.label(qcode, lang);
            if (text) per_lang.emplace(lang, *text);
        }
    }
    return binding;
}

std::string realize_question(const std::string& pattern_text, const Binding& binding,
                             const std::string& lang) {
    std::string out;
    out.reserve(pattern_text.size());
    std::size_t done = 0;
    for (const auto& span : util::placeholder_spans(pattern_text)) {
        out += pattern_text.substr(done, span.offset - done);
        const std::string surface = pattern_text.substr(span.offset, span.length);
        auto qcode = binding.entity_for(surface);
        if (!qcode)
            throw ValidationError("question references " + surface +
                                  " but the binding does not assign it");
        auto by_entity = binding.labels.find(*qcode);
        if (by_entity == binding.labels.end() || !by_entity->second.count(lang))
            throw ValidationError("no " + lang + " label for " + *qcode);
        out += "[" + by_entity->second.at(lang) + "]";
        done = span.offset + span.length;
    }
    out += pattern_text.substr(done);
    return out;
}

void PredicatePools::add(const std::string& pcode, const std::string& qcode) {
    auto& pool = by_property[pcode];
    auto it = std::lower_bound(pool.begin(), pool.end(), qcode);
    if (it == pool.end() || *it != qcode) pool.insert(it, qcode);
}

const std::vector<std::string>& PredicatePools::pool(const std::string& pcode) const {
    static const std::vector<std::string> empty;
    auto it = by_property.find(pcode);
    return it == by_property.end() ? empty : it->second;
}

PredicatePools build_predicate_pools(const std::vector<Query>& concrete_queries) {
    PredicatePools pools;
    for (const auto& q : concrete_queries) {
        if (q.dialect != Dialect::Wikidata)
            throw sparql::DialectError("predicate pools expect Wikidata-dialect queries");
        for (const auto& t : q.triples) {
            if (!t.object || t.object->kind != Term::Kind::WikidataEntity) continue;
            const auto& path = std::get<sparql::PropertyPath>(t.predicate);
            pools.add(path.steps[0].property.text, t.object->text);
        }
    }
    return pools;
}

std::optional<NegativeSample> negative_sample(const Query& concrete, const Query& pattern,
                                              const PredicatePools& pools, QueryService& service,
                                              std::mt19937_64& rng, std::size_t max_attempts) {
    if (concrete.form != QueryForm::Ask)
        throw ValidationError("negative sampling applies to ASK queries");
    auto binding = sparql::infer_binding(pattern, concrete);
    for (const auto& [name, term] : binding)
        if (term.kind != Term::Kind::WikidataEntity)
            throw ValidationError("placeholder " + name + " is not bound to an entity");

    std::set<std::string> bound_values;
    for (const auto& [name, term] : binding) bound_values.insert(term.text);

    std::set<std::pair<std::string, std::string>> unique;
    for (const auto& t : pattern.triples) {
        if (!t.object || t.object->kind != Term::Kind::Placeholder) continue;
        const auto& path = std::get<sparql::PropertyPath>(t.predicate);
        const std::string& current = binding.at(t.object->text).text;
        for (const auto& candidate : pools.pool(path.steps[0].property.text)) {
            if (candidate == current || bound_values.count(candidate)) continue;
            unique.emplace(t.object->text, candidate);
        }
    }
    if (unique.empty()) return std::nullopt;

    std::vector<std::pair<std::string, std::string>> candidates(unique.begin(), unique.end());
    util::deterministic_shuffle(candidates, rng);
    const std::size_t budget = std::min(max_attempts, candidates.size());
    for (std::size_t i = 0; i < budget; ++i) {
        const auto& [placeholder, replacement] = candidates[i];
        auto swapped = binding;
        swapped[placeholder] = sparql::make_entity(replacement);
        Query candidate_query = sparql::bind_placeholders(pattern, swapped);
        auto result = service.execute(candidate_query);
        if (!result.is_boolean)
            throw MalformedResponseError("ASK probe answered with rows instead of a boolean");
        if (!result.boolean)
            return NegativeSample{std::move(candidate_query), placeholder,
                                  binding.at(placeholder).text, replacement};
    }
    return std::nullopt;
}

}  // namespace kbqa::ground
