#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kbqa/sparql/ast.hpp"

namespace kbqa::dataset {

enum class QuestionKind { YesNo, Wh };

const char* kind_name(QuestionKind kind);
QuestionKind kind_from_name(const std::string& name);

/// One dataset record. Question fields are keyed by language code (en, he,
/// kn, zh); SPARQL fields hold canonical Wikidata-dialect text.
/// expected_response is a JSON boolean for yes/no entries and an array of
/// result values for wh entries.
struct DatasetEntry {
    std::int64_t id = 0;
    QuestionKind question_kind = QuestionKind::YesNo;
    std::map<std::string, std::string> question_with_brackets;
    std::map<std::string, std::string> question_pattern_mod_entities;
    std::string sparql;
    std::string sparql_pattern_mod_entities;
    std::int64_t recursion_depth = 0;
    nlohmann::json expected_response;

    bool operator==(const DatasetEntry&) const = default;

    nlohmann::ordered_json to_json() const;
    static DatasetEntry from_json(const nlohmann::json& j);
};

std::vector<DatasetEntry> read_entries(const std::filesystem::path& path);
void write_entries(const std::filesystem::path& path, const std::vector<DatasetEntry>& entries);

/// Checks the documented record invariants: both SPARQL fields are canonical
/// Wikidata text, the pattern really is the query with every non-special
/// entity swapped for a placeholder (injectively), the question kind matches
/// the query form, and expected_response has the right JSON shape. Throws
/// ValidationError naming the entry id.
void validate_entry(const DatasetEntry& entry, const std::set<std::string>& special_qcodes = {});

/// Corpus-level dedup counts. Percentages are over unique questions.
struct DatasetStats {
    std::size_t unique_questions = 0;
    std::size_t question_patterns = 0;
    std::size_t unique_queries = 0;
    std::size_t query_patterns = 0;
    std::size_t yes_no_count = 0;
    std::size_t wh_count = 0;

    double yes_no_percent() const;
    double wh_percent() const;
    nlohmann::ordered_json to_json() const;
};

/// Dedup key for questions is the English question string.
DatasetStats compute_stats(const std::vector<DatasetEntry>& entries);

/// Train/dev/test id partition of one named split.
struct SplitSet {
    std::string name;
    std::vector<std::int64_t> train;
    std::vector<std::int64_t> dev;
    std::vector<std::int64_t> test;
};

/// One source split file: JSON object with trainIdxs/devIdxs/testIdxs arrays.
struct SourceSplit {
    std::string name;
    nlohmann::json document;
};

SourceSplit load_split_file(const std::filesystem::path& path);

/// Ids referenced by a source split but absent from the entry set, per split.
struct SplitReport {
    std::map<std::string, std::size_t> missing_by_split;
    nlohmann::ordered_json to_json() const;
};

/// Restricts each source split to the ids present in entries. Partitions come
/// out sorted ascending. Throws ValidationError when one source split lists
/// an id in two partitions.
std::vector<SplitSet> induce_splits(const std::vector<DatasetEntry>& entries,
                                    const std::vector<SourceSplit>& sources,
                                    SplitReport* report = nullptr);

/// Depth histogram of one id partition. Unknown ids throw ValidationError.
std::map<std::int64_t, std::size_t> complexity_histogram(
    const std::vector<DatasetEntry>& entries, const std::vector<std::int64_t>& ids);

/// Intersects the test partitions of the given splits, then samples up to
/// 2 yes/no and 2 wh entries per recursion depth with the seed. Output is
/// ordered by id and reproducible for a fixed seed.
std::vector<DatasetEntry> build_intersection_testset(const std::vector<SplitSet>& splits,
                                                     const std::vector<DatasetEntry>& entries,
                                                     std::uint64_t seed);

}  // namespace kbqa::dataset
