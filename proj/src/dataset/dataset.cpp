#include "kbqa/dataset/dataset.hpp"

#include <algorithm>

#include "kbqa/sparql/parser.hpp"
#include "kbqa/util.hpp"

namespace kbqa::dataset {

using nlohmann::json;
using nlohmann::ordered_json;
using util::ValidationError;

const char* kind_name(QuestionKind kind) {
    return kind == QuestionKind::YesNo ? "YesNo" : "Wh";
}

QuestionKind kind_from_name(const std::string& name) {
    if (name == "YesNo") return QuestionKind::YesNo;
    if (name == "Wh") return QuestionKind::Wh;
    throw ValidationError("unknown question kind: " + name);
}

namespace {

ordered_json language_map_to_json(const std::map<std::string, std::string>& m) {
    ordered_json out = ordered_json::object();
    for (const auto& [lang, text] : m) out[lang] = text;
    return out;
}

std::map<std::string, std::string> language_map_from_json(const json& j, const char* field) {
    if (!j.is_object()) throw ValidationError(std::string(field) + " must be an object");
    std::map<std::string, std::string> out;
    for (const auto& [lang, text] : j.items()) {
        if (!text.is_string())
            throw ValidationError(std::string(field) + "." + lang + " must be a string");
        out.emplace(lang, text.get<std::string>());
    }
    return out;
}

const json& require_field(const json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end()) throw ValidationError(std::string("missing field ") + field);
    return *it;
}

}  // namespace

ordered_json DatasetEntry::to_json() const {
    ordered_json out;
    out["id"] = id;
    out["questionKind"] = kind_name(question_kind);
    out["questionWithBrackets"] = language_map_to_json(question_with_brackets);
    out["questionPatternModEntities"] = language_map_to_json(question_pattern_mod_entities);
    out["sparql"] = sparql;
    out["sparqlPatternModEntities"] = sparql_pattern_mod_entities;
    out["recursionDepth"] = recursion_depth;
    out["expectedResponse"] = expected_response;
    return out;
}

DatasetEntry DatasetEntry::from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("entry must be a JSON object");
    DatasetEntry e;
    e.id = require_field(j, "id").get<std::int64_t>();
    e.question_kind = kind_from_name(require_field(j, "questionKind").get<std::string>());
    e.question_with_brackets =
        language_map_from_json(require_field(j, "questionWithBrackets"), "questionWithBrackets");
    e.question_pattern_mod_entities = language_map_from_json(
        require_field(j, "questionPatternModEntities"), "questionPatternModEntities");
    e.sparql = require_field(j, "sparql").get<std::string>();
    e.sparql_pattern_mod_entities =
        require_field(j, "sparqlPatternModEntities").get<std::string>();
    e.recursion_depth = require_field(j, "recursionDepth").get<std::int64_t>();
    if (e.recursion_depth < 0) throw ValidationError("recursionDepth must be non-negative");
    e.expected_response = require_field(j, "expectedResponse");
    return e;
}

std::vector<DatasetEntry> read_entries(const std::filesystem::path& path) {
    std::vector<DatasetEntry> out;
    std::size_t line = 0;
    for (const auto& record : util::read_jsonl(path)) {
        ++line;
        try {
            out.push_back(DatasetEntry::from_json(record));
        } catch (const std::exception& e) {
            throw ValidationError(path.string() + ": record " + std::to_string(line) + ": " +
                                  e.what());
        }
    }
    return out;
}

void write_entries(const std::filesystem::path& path,
                   const std::vector<DatasetEntry>& entries) {
    std::vector<ordered_json> records;
    records.reserve(entries.size());
    for (const auto& e : entries) records.push_back(e.to_json());
    util::write_jsonl(path, records);
}

void validate_entry(const DatasetEntry& entry, const std::set<std::string>& special_qcodes) {
    const std::string where = "entry " + std::to_string(entry.id) + ": ";
    try {
        auto q = sparql::parse_query(entry.sparql, sparql::Dialect::Wikidata);
        if (sparql::serialize_query(q) != entry.sparql)
            throw ValidationError("sparql is not canonical");
        if (!sparql::placeholders_in(q).empty())
            throw ValidationError("sparql still contains placeholders");

        auto pattern = sparql::parse_query(entry.sparql_pattern_mod_entities,
                                           sparql::Dialect::Wikidata);
        if (sparql::serialize_query(pattern) != entry.sparql_pattern_mod_entities)
            throw ValidationError("sparqlPatternModEntities is not canonical");

        // The pattern must be the query with every non-special entity
        // replaced by a placeholder, injectively.
        auto binding = sparql::infer_binding(pattern, q);
        std::map<std::string, std::string> preferred;
        for (const auto& [placeholder, term] : binding) {
            if (term.kind != sparql::Term::Kind::WikidataEntity)
                throw ValidationError("placeholder " + placeholder +
                                      " does not stand for an entity");
            if (!preferred.emplace(term.text, placeholder).second)
                throw ValidationError("two placeholders stand for " + term.text);
        }
        auto rederived = sparql::mod_entities(q, special_qcodes, preferred);
        if (sparql::serialize_query(rederived.pattern) != entry.sparql_pattern_mod_entities)
            throw ValidationError("pattern does not match mod_entities of sparql");

        const bool is_ask = q.form == sparql::QueryForm::Ask;
        if ((entry.question_kind == QuestionKind::YesNo) != is_ask)
            throw ValidationError("questionKind does not match the query form");
        if (is_ask && !entry.expected_response.is_boolean())
            throw ValidationError("yes/no entry needs a boolean expectedResponse");
        if (!is_ask && !entry.expected_response.is_array())
            throw ValidationError("wh entry needs an array expectedResponse");

        if (!entry.question_with_brackets.count("en"))
            throw ValidationError("questionWithBrackets lacks en");
        if (!entry.question_pattern_mod_entities.count("en"))
            throw ValidationError("questionPatternModEntities lacks en");
    } catch (const sparql::ParseError& e) {
        throw ValidationError(where + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(where + e.what());
    }
}

double DatasetStats::yes_no_percent() const {
    return unique_questions == 0 ? 0.0
                                 : 100.0 * static_cast<double>(yes_no_count) /
                                       static_cast<double>(unique_questions);
}

double DatasetStats::wh_percent() const {
    return unique_questions == 0
               ? 0.0
               : 100.0 * static_cast<double>(wh_count) / static_cast<double>(unique_questions);
}

ordered_json DatasetStats::to_json() const {
    ordered_json out;
    out["uniqueQuestions"] = unique_questions;
    out["questionPatterns"] = question_patterns;
    out["uniqueQueries"] = unique_queries;
    out["queryPatterns"] = query_patterns;
    out["yesNoCount"] = yes_no_count;
    out["yesNoPercent"] = yes_no_percent();
    out["whCount"] = wh_count;
    out["whPercent"] = wh_percent();
    return out;
}

DatasetStats compute_stats(const std::vector<DatasetEntry>& entries) {
    std::map<std::string, QuestionKind> questions;
    std::set<std::string> question_patterns, queries, query_patterns;
    for (const auto& e : entries) {
        auto en = e.question_with_brackets.find("en");
        if (en == e.question_with_brackets.end())
            throw ValidationError("entry " + std::to_string(e.id) +
                                  " lacks an English question");
        questions.emplace(en->second, e.question_kind);
        auto pattern = e.question_pattern_mod_entities.find("en");
        if (pattern != e.question_pattern_mod_entities.end())
            question_patterns.insert(pattern->second);
        queries.insert(e.sparql);
        query_patterns.insert(e.sparql_pattern_mod_entities);
    }
    DatasetStats stats;
    stats.unique_questions = questions.size();
    stats.question_patterns = question_patterns.size();
    stats.unique_queries = queries.size();
    stats.query_patterns = query_patterns.size();
    for (const auto& [text, kind] : questions) {
        if (kind == QuestionKind::YesNo)
            ++stats.yes_no_count;
        else
            ++stats.wh_count;
    }
    return stats;
}

SourceSplit load_split_file(const std::filesystem::path& path) {
    json document;
    try {
        document = json::parse(util::read_file(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return SourceSplit{path.stem().string(), std::move(document)};
}

ordered_json SplitReport::to_json() const {
    ordered_json out = ordered_json::object();
    for (const auto& [name, missing] : missing_by_split) out[name] = missing;
    return out;
}

namespace {

std::vector<std::int64_t> partition_ids(const json& document, const char* key,
                                        const std::string& split_name) {
    auto it = document.find(key);
    if (it == document.end()) return {};
    if (!it->is_array())
        throw ValidationError("split " + split_name + ": " + key + " must be an array");
    std::vector<std::int64_t> out;
    for (const auto& v : *it) {
        if (!v.is_number_integer())
            throw ValidationError("split " + split_name + ": " + key + " holds a non-integer");
        out.push_back(v.get<std::int64_t>());
    }
    return out;
}

}  // namespace

std::vector<SplitSet> induce_splits(const std::vector<DatasetEntry>& entries,
                                    const std::vector<SourceSplit>& sources,
                                    SplitReport* report) {
    std::set<std::int64_t> survivors;
    for (const auto& e : entries) survivors.insert(e.id);

    std::vector<SplitSet> out;
    for (const auto& source : sources) {
        if (!source.document.is_object())
            throw ValidationError("split " + source.name + ": document must be a JSON object");
        SplitSet split;
        split.name = source.name;
        std::size_t missing = 0;
        std::set<std::int64_t> claimed;
        auto restrict_ids = [&](const char* key, std::vector<std::int64_t>& target) {
            for (auto id : partition_ids(source.document, key, source.name)) {
                if (!claimed.insert(id).second)
                    throw ValidationError("split " + source.name + ": id " +
                                          std::to_string(id) + " appears in two partitions");
                if (survivors.count(id))
                    target.push_back(id);
                else
                    ++missing;
            }
            std::sort(target.begin(), target.end());
        };
        restrict_ids("trainIdxs", split.train);
        restrict_ids("devIdxs", split.dev);
        restrict_ids("testIdxs", split.test);
        if (report) report->missing_by_split[source.name] = missing;
        out.push_back(std::move(split));
    }
    return out;
}

std::map<std::int64_t, std::size_t> complexity_histogram(
    const std::vector<DatasetEntry>& entries, const std::vector<std::int64_t>& ids) {
    std::map<std::int64_t, std::int64_t> depth_by_id;
    for (const auto& e : entries) depth_by_id[e.id] = e.recursion_depth;
    std::map<std::int64_t, std::size_t> histogram;
    for (auto id : ids) {
        auto it = depth_by_id.find(id);
        if (it == depth_by_id.end())
            throw ValidationError("histogram id " + std::to_string(id) +
                                  " is not in the entry set");
        ++histogram[it->second];
    }
    return histogram;
}

std::vector<DatasetEntry> build_intersection_testset(const std::vector<SplitSet>& splits,
                                                     const std::vector<DatasetEntry>& entries,
                                                     std::uint64_t seed) {
    if (splits.empty()) return {};
    std::set<std::int64_t> intersection(splits[0].test.begin(), splits[0].test.end());
    for (std::size_t i = 1; i < splits.size(); ++i) {
        std::set<std::int64_t> next;
        for (auto id : splits[i].test)
            if (intersection.count(id)) next.insert(id);
        intersection = std::move(next);
    }

    std::map<std::int64_t, const DatasetEntry*> by_id;
    for (const auto& e : entries) by_id[e.id] = &e;

    // depth → kind → candidate ids, ascending for a stable shuffle base.
    std::map<std::int64_t, std::map<QuestionKind, std::vector<std::int64_t>>> buckets;
    for (auto id : intersection) {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw ValidationError("test id " + std::to_string(id) + " is not in the entry set");
        buckets[it->second->recursion_depth][it->second->question_kind].push_back(id);
    }

    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> chosen;
    for (auto& [depth, kinds] : buckets) {
        (void)depth;
        for (auto kind : {QuestionKind::YesNo, QuestionKind::Wh}) {
            auto it = kinds.find(kind);
            if (it == kinds.end()) continue;
            util::deterministic_shuffle(it->second, rng);
            for (std::size_t i = 0; i < it->second.size() && i < 2; ++i)
                chosen.push_back(it->second[i]);
        }
    }
    std::sort(chosen.begin(), chosen.end());

    std::vector<DatasetEntry> out;
    out.reserve(chosen.size());
    for (auto id : chosen) out.push_back(*by_id.at(id));
    return out;
}

}  // namespace kbqa::dataset
