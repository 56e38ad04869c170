#include "kbqa/eval/eval.hpp"

#include <cmath>

#include "kbqa/sparql/parser.hpp"
#include "kbqa/util.hpp"

namespace kbqa::eval {

using util::ValidationError;

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
    std::vector<PredictionRecord> out;
    std::set<std::int64_t> seen;
    std::size_t line = 0;
    for (const auto& record : util::read_jsonl(path)) {
        ++line;
        const std::string where = path.string() + ": record " + std::to_string(line) + ": ";
        if (!record.is_object() || !record.contains("id") || !record.contains("prediction"))
            throw ValidationError(where + "need id and prediction fields");
        if (!record["id"].is_number_integer() || !record["prediction"].is_string())
            throw ValidationError(where + "id must be an integer, prediction a string");
        PredictionRecord p;
        p.id = record["id"].get<std::int64_t>();
        p.prediction = record["prediction"].get<std::string>();
        if (record.contains("lang")) p.lang = record["lang"].get<std::string>();
        if (!seen.insert(p.id).second)
            throw ValidationError(where + "duplicate prediction for id " + std::to_string(p.id));
        out.push_back(std::move(p));
    }
    return out;
}

MatchResult exact_match(const std::string& gold, const std::string& pred, bool normalized) {
    auto gold_query = sparql::parse_query(gold, sparql::Dialect::Wikidata);
    sparql::Query pred_query;
    try {
        pred_query = sparql::parse_query(pred, sparql::Dialect::Wikidata);
    } catch (const sparql::ParseError&) {
        return MatchResult{false, true};
    }
    if (normalized) {
        gold_query = sparql::normalized(gold_query);
        pred_query = sparql::normalized(pred_query);
    }
    return MatchResult{sparql::serialize_query(gold_query) ==
                           sparql::serialize_query(pred_query),
                       false};
}

namespace {

/// n-gram counts of one token sequence, as joined strings.
std::map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens,
                                                std::size_t n) {
    std::map<std::string, std::size_t> counts;
    if (tokens.size() < n) return counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t k = 1; k < n; ++k) key += "\x1f" + tokens[i + k];
        ++counts[key];
    }
    return counts;
}

}  // namespace

double corpus_bleu(const std::vector<std::vector<std::string>>& references,
                   const std::vector<std::vector<std::string>>& hypotheses) {
    if (references.size() != hypotheses.size())
        throw ValidationError("BLEU needs equally many references and hypotheses");
    if (references.empty()) throw ValidationError("BLEU over an empty corpus is undefined");

    constexpr std::size_t kMaxOrder = 4;
    std::size_t ref_len = 0, hyp_len = 0;
    std::size_t matches[kMaxOrder] = {0, 0, 0, 0};
    std::size_t totals[kMaxOrder] = {0, 0, 0, 0};
    for (std::size_t i = 0; i < references.size(); ++i) {
        ref_len += references[i].size();
        hyp_len += hypotheses[i].size();
        for (std::size_t n = 1; n <= kMaxOrder; ++n) {
            if (hypotheses[i].size() < n) continue;
            totals[n - 1] += hypotheses[i].size() - n + 1;
            auto ref_counts = ngram_counts(references[i], n);
            for (const auto& [gram, count] : ngram_counts(hypotheses[i], n)) {
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
            }
        }
    }

    if (hyp_len == 0) return 0.0;
    double log_precision_sum = 0.0;
    for (std::size_t n = 0; n < kMaxOrder; ++n) {
        // No smoothing: any empty order zeroes the whole score.
        if (matches[n] == 0 || totals[n] == 0) return 0.0;
        log_precision_sum += std::log(static_cast<double>(matches[n]) /
                                      static_cast<double>(totals[n]));
    }
    const double brevity =
        hyp_len >= ref_len
            ? 1.0
            : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return 100.0 * brevity * std::exp(log_precision_sum / static_cast<double>(kMaxOrder));
}

double corpus_bleu_text(const std::vector<std::string>& references,
                        const std::vector<std::string>& hypotheses) {
    std::vector<std::vector<std::string>> refs, hyps;
    refs.reserve(references.size());
    hyps.reserve(hypotheses.size());
    for (const auto& r : references) refs.push_back(util::split_whitespace(r));
    for (const auto& h : hypotheses) hyps.push_back(util::split_whitespace(h));
    return corpus_bleu(refs, hyps);
}

int ErrorProfile::flag_count() const {
    return static_cast<int>(missing_property) + static_cast<int>(extra_property) +
           static_cast<int>(wrong_property) + static_cast<int>(missing_entity) +
           static_cast<int>(extra_entity) + static_cast<int>(wrong_entity);
}

ErrorProfile categorize_errors(const sparql::Query& gold, const sparql::Query* pred,
                               const std::set<std::string>& exclude_entities) {
    ErrorProfile profile;
    if (pred == nullptr) {
        profile.unparseable = true;
        return profile;
    }
    auto gold_props = sparql::extract_properties(gold);
    auto pred_props = sparql::extract_properties(*pred);
    if (pred_props.size() < gold_props.size())
        profile.missing_property = true;
    else if (pred_props.size() > gold_props.size())
        profile.extra_property = true;
    else if (pred_props != gold_props)
        profile.wrong_property = true;

    auto gold_entities = sparql::extract_entities(gold);
    auto pred_entities = sparql::extract_entities(*pred);
    for (const auto& excluded : exclude_entities) {
        gold_entities.erase(excluded);
        pred_entities.erase(excluded);
    }
    if (pred_entities.size() < gold_entities.size())
        profile.missing_entity = true;
    else if (pred_entities.size() > gold_entities.size())
        profile.extra_entity = true;
    else if (pred_entities != gold_entities)
        profile.wrong_entity = true;

    profile.multiple_errors = profile.flag_count() >= 2;
    return profile;
}

std::map<std::int64_t, DepthTally> accuracy_by_complexity(
    const std::vector<dataset::DatasetEntry>& gold,
    const std::map<std::int64_t, std::string>& predictions, bool strict_coverage,
    bool normalized) {
    std::map<std::int64_t, DepthTally> tallies;
    for (const auto& entry : gold) {
        auto pred = predictions.find(entry.id);
        if (pred == predictions.end()) {
            if (strict_coverage) ++tallies[entry.recursion_depth].total;
            continue;
        }
        auto& tally = tallies[entry.recursion_depth];
        ++tally.total;
        if (exact_match(entry.sparql, pred->second, normalized).match) ++tally.correct;
    }
    return tallies;
}

namespace {

const std::vector<std::pair<const char*, bool ErrorProfile::*>> kFlagFields = {
    {"missing_property", &ErrorProfile::missing_property},
    {"extra_property", &ErrorProfile::extra_property},
    {"wrong_property", &ErrorProfile::wrong_property},
    {"missing_entity", &ErrorProfile::missing_entity},
    {"extra_entity", &ErrorProfile::extra_entity},
    {"wrong_entity", &ErrorProfile::wrong_entity},
    {"multiple_errors", &ErrorProfile::multiple_errors},
    {"unparseable", &ErrorProfile::unparseable},
};

}  // namespace

nlohmann::ordered_json ErrorReport::to_json() const {
    nlohmann::ordered_json out;
    out["runs"] = runs;
    out["profiles"] = profiles;
    out["totals"] = nlohmann::ordered_json::object();
    out["means"] = nlohmann::ordered_json::object();
    for (const auto& [name, field] : kFlagFields) {
        (void)field;
        out["totals"][name] = totals.count(name) ? totals.at(name) : 0;
        out["means"][name] = means.count(name) ? means.at(name) : 0.0;
    }
    return out;
}

ErrorReport error_report(const std::vector<std::vector<ErrorProfile>>& runs) {
    ErrorReport report;
    report.runs = runs.size();
    for (const auto& [name, field] : kFlagFields) {
        (void)field;
        report.totals[name] = 0;
    }
    for (const auto& run : runs) {
        report.profiles += run.size();
        for (const auto& profile : run)
            for (const auto& [name, field] : kFlagFields)
                if (profile.*field) ++report.totals[name];
    }
    if (report.runs > 0)
        for (const auto& [name, total] : report.totals)
            report.means[name] = static_cast<double>(total) / static_cast<double>(report.runs);
    return report;
}

}  // namespace kbqa::eval
