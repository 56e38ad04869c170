#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kbqa/dataset/dataset.hpp"
#include "kbqa/sparql/ast.hpp"

namespace kbqa::eval {

/// One model output to score against the gold entry with the same id.
struct PredictionRecord {
    std::int64_t id = 0;
    std::string prediction;
    std::optional<std::string> lang;
};

/// JSON-lines of {id, prediction, [lang]}. Duplicate ids are an error.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

/// Outcome of comparing one prediction string against gold text.
struct MatchResult {
    bool match = false;
    bool unparseable = false;
};

/// Strict mode compares canonical serializations as generated; normalized
/// mode sorts triples and filters on both sides first. Unparseable
/// predictions never match.
MatchResult exact_match(const std::string& gold, const std::string& pred,
                        bool normalized = false);

/// Corpus-level BLEU over token sequences, n-grams up to 4, uniform weights,
/// exponential brevity penalty, no smoothing. Returns a score in [0, 100].
/// Throws ValidationError on an empty corpus or mismatched list lengths.
double corpus_bleu(const std::vector<std::vector<std::string>>& references,
                   const std::vector<std::vector<std::string>>& hypotheses);

/// Convenience wrapper tokenizing both sides on whitespace.
double corpus_bleu_text(const std::vector<std::string>& references,
                        const std::vector<std::string>& hypotheses);

/// Which multiset comparisons failed for one prediction.
struct ErrorProfile {
    bool missing_property = false;
    bool extra_property = false;
    bool wrong_property = false;
    bool missing_entity = false;
    bool extra_entity = false;
    bool wrong_entity = false;
    bool multiple_errors = false;
    bool unparseable = false;

    int flag_count() const;
    bool operator==(const ErrorProfile&) const = default;
};

/// Compares property and entity multisets of gold and prediction. A null
/// prediction marks the profile unparseable with every flag off. Cardinality
/// decides missing/extra; equal cardinality with unequal content is wrong.
/// exclude_entities removes the given identifiers (e.g. special entities)
/// from both entity multisets before comparison.
ErrorProfile categorize_errors(const sparql::Query& gold, const sparql::Query* pred,
                               const std::set<std::string>& exclude_entities = {});

/// Per-depth exact-match tally.
struct DepthTally {
    std::size_t correct = 0;
    std::size_t total = 0;
};

/// Scores predictions (id → SPARQL text) against gold entries, grouping by
/// recursion depth. Entries without a prediction are excluded unless
/// strict_coverage counts them as wrong.
std::map<std::int64_t, DepthTally> accuracy_by_complexity(
    const std::vector<dataset::DatasetEntry>& gold,
    const std::map<std::int64_t, std::string>& predictions, bool strict_coverage,
    bool normalized = false);

/// Flag sums over every profile of every run, plus per-flag means across
/// runs (totals divided by the run count).
struct ErrorReport {
    std::size_t runs = 0;
    std::size_t profiles = 0;
    std::map<std::string, std::size_t> totals;
    std::map<std::string, double> means;

    nlohmann::ordered_json to_json() const;
};

ErrorReport error_report(const std::vector<std::vector<ErrorProfile>>& runs);

}  // namespace kbqa::eval
