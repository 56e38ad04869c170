#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "kbqa/cli/config.hpp"
#include "kbqa/dataset/dataset.hpp"

namespace kbqa::cli {

/// A migrated but still placeholder-bearing record: the bridge file between
/// cmd_migrate and cmd_ground. Question patterns are keyed by language.
struct PatternEntry {
    std::int64_t id = 0;
    dataset::QuestionKind kind = dataset::QuestionKind::YesNo;
    std::map<std::string, std::string> question_pattern;
    std::string sparql_pattern;  ///< canonical Wikidata-dialect text
    std::int64_t recursion_depth = 0;

    bool operator==(const PatternEntry&) const = default;

    nlohmann::ordered_json to_json() const;
    static PatternEntry from_json(const nlohmann::json& j);
};

std::vector<PatternEntry> read_patterns(const std::filesystem::path& path);
void write_patterns(const std::filesystem::path& path, const std::vector<PatternEntry>& entries);

/// Freebase-dialect JSON-lines -> patterns.jsonl + migration_report.json.
/// Per-entry rejections are data (tallied in the report), not failures.
void cmd_migrate(const RunConfig& config);

/// patterns.jsonl + endpoint or snapshot -> dataset.jsonl + grounding report.
/// An aborted endpoint run leaves a checkpoint in the output directory and
/// resumes from it on the next invocation with the same input.
void cmd_ground(const RunConfig& config);

/// dataset.jsonl -> multilingual dataset.jsonl + translation_report.json.
/// Entries with failed or flagged translations are excluded and listed.
void cmd_translate(const RunConfig& config);

/// dataset.jsonl -> dedup statistics (stats.json + stats.tsv).
void cmd_stats(const RunConfig& config);

/// dataset.jsonl + source splits -> induced splits, per-partition complexity
/// histograms, and the sampled intersection test set.
void cmd_split(const RunConfig& config);

/// dataset.jsonl + predictions -> exact match, BLEU, error profiles, and
/// accuracy by recursion depth.
void cmd_eval(const RunConfig& config);

}  // namespace kbqa::cli
