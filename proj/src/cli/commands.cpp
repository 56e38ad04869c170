#include "kbqa/cli/commands.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include "common.hpp"
#include "kbqa/cli/manifest.hpp"
#include "kbqa/digest.hpp"
#include "kbqa/eval/eval.hpp"
#include "kbqa/mapping/mapping.hpp"
#include "kbqa/sparql/parser.hpp"
#include "kbqa/translate/translate.hpp"
#include "kbqa/util.hpp"

namespace kbqa::cli {

using nlohmann::ordered_json;
using util::ValidationError;

std::filesystem::path require_input_path(const RunConfig& config) {
    if (config.input.empty()) throw ConfigError("missing input file (--input)");
    return config.input;
}

std::filesystem::path require_output_path(const RunConfig& config) {
    if (config.output.empty()) throw ConfigError("missing output directory (--output)");
    std::filesystem::path dir(config.output);
    std::filesystem::create_directories(dir);
    return dir;
}

namespace {

std::map<std::string, std::string> language_map_from(const nlohmann::json& node) {
    std::map<std::string, std::string> out;
    if (node.is_string()) {
        out["en"] = node.get<std::string>();
    } else if (node.is_object()) {
        for (const auto& [lang, text] : node.items()) {
            if (!text.is_string()) throw ValidationError("question text for " + lang + " must be a string");
            out[lang] = text.get<std::string>();
        }
    } else {
        throw ValidationError("questionPatternModEntities must be a string or an object");
    }
    return out;
}

ordered_json language_map_json(const std::map<std::string, std::string>& m) {
    auto out = ordered_json::object();
    for (const auto& [lang, text] : m) out[lang] = text;
    return out;
}

}  // namespace

ordered_json PatternEntry::to_json() const {
    ordered_json out;
    out["id"] = id;
    out["questionKind"] = dataset::kind_name(kind);
    out["questionPatternModEntities"] = language_map_json(question_pattern);
    out["sparqlPatternModEntities"] = sparql_pattern;
    out["recursionDepth"] = recursion_depth;
    return out;
}

PatternEntry PatternEntry::from_json(const nlohmann::json& j) {
    for (const char* key :
         {"id", "questionKind", "questionPatternModEntities", "sparqlPatternModEntities",
          "recursionDepth"})
        if (!j.contains(key)) throw ValidationError(std::string("missing field ") + key);
    PatternEntry e;
    if (!j.at("id").is_number_integer()) throw ValidationError("id must be an integer");
    e.id = j.at("id").get<std::int64_t>();
    e.kind = dataset::kind_from_name(j.at("questionKind").get<std::string>());
    e.question_pattern = language_map_from(j.at("questionPatternModEntities"));
    e.sparql_pattern = j.at("sparqlPatternModEntities").get<std::string>();
    if (!j.at("recursionDepth").is_number_integer() || j.at("recursionDepth").get<std::int64_t>() < 0)
        throw ValidationError("recursionDepth must be a non-negative integer");
    e.recursion_depth = j.at("recursionDepth").get<std::int64_t>();
    return e;
}

std::vector<PatternEntry> read_patterns(const std::filesystem::path& path) {
    auto records = util::read_jsonl(path);
    std::vector<PatternEntry> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        try {
            out.push_back(PatternEntry::from_json(records[i]));
        } catch (const std::exception& e) {
            throw ValidationError(path.string() + ": record " + std::to_string(i + 1) + ": " +
                                  e.what());
        }
    }
    return out;
}

void write_patterns(const std::filesystem::path& path, const std::vector<PatternEntry>& entries) {
    std::vector<ordered_json> records;
    records.reserve(entries.size());
    for (const auto& e : entries) records.push_back(e.to_json());
    util::write_jsonl(path, records);
}

void cmd_migrate(const RunConfig& config) {
    auto input = require_input_path(config);
    auto dir = require_output_path(config);
    if (config.mapping.empty() || config.specials.empty())
        throw ConfigError("migrate needs --mapping and --specials");
    util::LockFile lock(dir);

    auto [table, specials] = mapping::load_mapping(config.mapping, config.specials);
    auto records = util::read_jsonl(input);

    std::vector<PatternEntry> migrated;
    std::vector<mapping::MigrationOutcome> outcomes;
    auto rejected = ordered_json::array();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::int64_t id = 0;
        sparql::Query parsed;
        std::map<std::string, std::string> question;
        std::int64_t depth = 0;
        try {
            id = r.contains("id") ? r.at("id").get<std::int64_t>()
                                  : static_cast<std::int64_t>(i);
            question = language_map_from(r.at("questionPatternModEntities"));
            depth = r.at("recursionDepth").get<std::int64_t>();
            parsed = sparql::parse_query(r.at("sparqlPatternModEntities").get<std::string>(),
                                         sparql::Dialect::Freebase);
        } catch (const std::exception& e) {
            throw ValidationError(input.string() + ": record " + std::to_string(i + 1) + ": " +
                                  e.what());
        }
        auto outcome = mapping::migrate_query(parsed, table, specials);
        outcomes.push_back(outcome);
        if (const auto* q = std::get_if<sparql::Query>(&outcome)) {
            PatternEntry e;
            e.id = id;
            e.kind = q->form == sparql::QueryForm::Ask ? dataset::QuestionKind::YesNo
                                                       : dataset::QuestionKind::Wh;
            e.question_pattern = std::move(question);
            e.sparql_pattern = sparql::serialize_query(*q);
            e.recursion_depth = depth;
            migrated.push_back(std::move(e));
        } else {
            const auto& rej = std::get<mapping::Rejection>(outcome);
            rejected.push_back({{"id", id},
                                {"reason", mapping::reason_name(rej.reason)},
                                {"detail", rej.detail}});
        }
    }

    write_patterns(dir / "patterns.jsonl", migrated);
    auto report = mapping::migration_report(outcomes).to_json();
    report["rejected"] = rejected;
    util::write_file(dir / "migration_report.json", report.dump(2) + "\n");
    write_manifest(dir, "migrate", config, {input, config.mapping, config.specials},
                   {dir / "patterns.jsonl", dir / "migration_report.json"});
    std::cerr << "migrate: " << migrated.size() << "/" << records.size() << " entries migrated\n";
}

void cmd_translate(const RunConfig& config) {
    auto input = require_input_path(config);
    auto dir = require_output_path(config);
    util::LockFile lock(dir);

    auto entries = dataset::read_entries(input);

    std::unique_ptr<translate::ReplayCache> cache;
    std::unique_ptr<translate::TranslationClient> client;
    std::vector<std::filesystem::path> manifest_inputs{input};
    if (config.translator == "identity") {
        client = std::make_unique<translate::IdentityClient>();
    } else if (config.translator == "dictionary") {
        if (config.dictionary.empty()) throw ConfigError("dictionary translator needs --dictionary");
        auto dict = std::make_unique<translate::DictionaryClient>();
        for (const auto& row : util::read_tsv(config.dictionary)) {
            if (row.fields.size() != 3)
                throw ValidationError(config.dictionary + ":" + std::to_string(row.line_number) +
                                      ": expected input<TAB>lang<TAB>output");
            dict->add(row.fields[0], row.fields[1], row.fields[2]);
        }
        manifest_inputs.push_back(config.dictionary);
        client = std::move(dict);
    } else if (config.translator == "remote") {
        if (config.mt_url.empty()) throw ConfigError("remote translator needs --mt-url");
        std::filesystem::path cache_path =
            config.replay_cache.empty() ? dir / "mt_cache.jsonl"
                                        : std::filesystem::path(config.replay_cache);
        cache = std::make_unique<translate::ReplayCache>(cache_path);
        translate::RemoteConfig remote;
        remote.url = config.mt_url;
        remote.api_key_env = config.mt_key_env;
        remote.timeout_seconds = config.timeout;
        client = std::make_unique<translate::RemoteClient>(remote, cache.get());
    } else {
        throw ConfigError("unknown translator '" + config.translator +
                          "' (expected identity, dictionary, or remote)");
    }

    std::vector<std::string> targets;
    for (const auto& lang : config.languages)
        if (lang != "en") targets.push_back(lang);

    std::vector<translate::TranslationOutcome> outcomes(entries.size());
    std::size_t workers = config.max_inflight > 0 ? static_cast<std::size_t>(config.max_inflight) : 1;
    util::parallel_for(entries.size(), workers, [&](std::size_t i) {
        outcomes[i] = translate::translate_entry(entries[i], *client, targets);
    });

    std::vector<dataset::DatasetEntry> translated;
    auto excluded = ordered_json::array();
    for (const auto& outcome : outcomes) {
        if (outcome.clean()) {
            translated.push_back(outcome.entry);
        } else {
            excluded.push_back({{"id", outcome.entry.id},
                                {"failedLanguages", outcome.failed_languages},
                                {"flaggedLanguages", outcome.flagged_languages}});
        }
    }

    dataset::write_entries(dir / "dataset.jsonl", translated);
    ordered_json report;
    report["total"] = entries.size();
    report["translated"] = translated.size();
    report["targets"] = targets;
    report["excluded"] = excluded;
    util::write_file(dir / "translation_report.json", report.dump(2) + "\n");
    write_manifest(dir, "translate", config, manifest_inputs,
                   {dir / "dataset.jsonl", dir / "translation_report.json"});
    std::cerr << "translate: " << translated.size() << "/" << entries.size()
              << " entries translated\n";
}

void cmd_stats(const RunConfig& config) {
    auto input = require_input_path(config);
    auto dir = require_output_path(config);
    util::LockFile lock(dir);

    auto entries = dataset::read_entries(input);
    auto stats = dataset::compute_stats(entries);

    auto j = stats.to_json();
    util::write_file(dir / "stats.json", j.dump(2) + "\n");

    std::string tsv = "metric\tvalue\n";
    tsv += "entries\t" + std::to_string(entries.size()) + "\n";
    for (const auto& [key, value] : j.items()) tsv += key + "\t" + value.dump() + "\n";
    util::write_file(dir / "stats.tsv", tsv);

    write_manifest(dir, "stats", config, {input}, {dir / "stats.json", dir / "stats.tsv"});
    std::cerr << "stats: " << entries.size() << " entries, " << stats.unique_questions
              << " unique questions\n";
}

void cmd_split(const RunConfig& config) {
    auto input = require_input_path(config);
    auto dir = require_output_path(config);
    if (config.splits.empty()) throw ConfigError("split needs at least one --splits file");
    util::LockFile lock(dir);

    auto entries = dataset::read_entries(input);
    std::vector<dataset::SourceSplit> sources;
    for (const auto& p : config.splits) sources.push_back(dataset::load_split_file(p));

    dataset::SplitReport split_report;
    auto splits = dataset::induce_splits(entries, sources, &split_report);

    std::vector<std::filesystem::path> outputs;
    auto summary = ordered_json::array();
    for (const auto& s : splits) {
        ordered_json doc;
        doc["trainIdxs"] = s.train;
        doc["devIdxs"] = s.dev;
        doc["testIdxs"] = s.test;
        auto split_path = dir / (s.name + ".json");
        util::write_file(split_path, doc.dump(2) + "\n");
        outputs.push_back(split_path);

        std::string tsv = "partition\trecursionDepth\tcount\n";
        auto add_partition = [&](const char* name, const std::vector<std::int64_t>& ids) {
            for (const auto& [depth, count] : dataset::complexity_histogram(entries, ids))
                tsv += std::string(name) + "\t" + std::to_string(depth) + "\t" +
                       std::to_string(count) + "\n";
        };
        add_partition("train", s.train);
        add_partition("dev", s.dev);
        add_partition("test", s.test);
        auto hist_path = dir / (s.name + "_histogram.tsv");
        util::write_file(hist_path, tsv);
        outputs.push_back(hist_path);

        summary.push_back({{"name", s.name},
                           {"trainSize", s.train.size()},
                           {"devSize", s.dev.size()},
                           {"testSize", s.test.size()}});
    }

    auto testset = dataset::build_intersection_testset(splits, entries, config.seed);
    dataset::write_entries(dir / "intersection_testset.jsonl", testset);
    outputs.push_back(dir / "intersection_testset.jsonl");

    ordered_json report;
    report["splits"] = summary;
    report["missingBySplit"] = split_report.to_json();
    report["intersectionTestsetSize"] = testset.size();
    util::write_file(dir / "split_report.json", report.dump(2) + "\n");
    outputs.push_back(dir / "split_report.json");

    std::vector<std::filesystem::path> inputs{input};
    for (const auto& p : config.splits) inputs.emplace_back(p);
    write_manifest(dir, "split", config, inputs, outputs);
    std::cerr << "split: " << splits.size() << " splits induced, intersection test set of "
              << testset.size() << "\n";
}

void cmd_eval(const RunConfig& config) {
    auto input = require_input_path(config);
    auto dir = require_output_path(config);
    if (config.predictions.empty()) throw ConfigError("eval needs --predictions");
    util::LockFile lock(dir);

    auto gold = dataset::read_entries(input);
    auto predictions = eval::read_predictions(config.predictions);

    std::map<std::int64_t, const dataset::DatasetEntry*> by_id;
    for (const auto& e : gold)
        if (!by_id.emplace(e.id, &e).second)
            throw ValidationError("duplicate gold id " + std::to_string(e.id));

    std::set<std::string> exclude;
    std::vector<std::filesystem::path> manifest_inputs{input, config.predictions};
    if (config.exclude_specials) {
        if (config.specials.empty()) throw ConfigError("--exclude-specials needs --specials");
        exclude = mapping::load_special_entities(config.specials).special_qcodes();
        manifest_inputs.emplace_back(config.specials);
    }

    std::size_t matches = 0, unparseable = 0;
    std::vector<eval::ErrorProfile> profiles;
    std::vector<std::string> refs, hyps;
    std::map<std::int64_t, std::string> prediction_map;
    for (const auto& p : predictions) {
        auto it = by_id.find(p.id);
        if (it == by_id.end())
            throw ValidationError("prediction id " + std::to_string(p.id) +
                                  " has no gold entry");
        const auto& entry = *it->second;
        prediction_map[p.id] = p.prediction;
        auto mr = eval::exact_match(entry.sparql, p.prediction, config.normalized);
        matches += mr.match ? 1 : 0;
        unparseable += mr.unparseable ? 1 : 0;

        auto gold_q = sparql::parse_query(entry.sparql, sparql::Dialect::Wikidata);
        std::optional<sparql::Query> pred_q;
        try {
            pred_q = sparql::parse_query(p.prediction, sparql::Dialect::Wikidata);
        } catch (const sparql::ParseError&) {
        }
        profiles.push_back(
            eval::categorize_errors(gold_q, pred_q ? &*pred_q : nullptr, exclude));
        refs.push_back(entry.sparql);
        hyps.push_back(p.prediction);
    }

    std::size_t scored = config.strict_coverage ? gold.size() : predictions.size();
    double accuracy = scored == 0 ? 0.0 : 100.0 * static_cast<double>(matches) / scored;
    double bleu = predictions.empty() ? 0.0 : eval::corpus_bleu_text(refs, hyps);
    auto by_depth =
        eval::accuracy_by_complexity(gold, prediction_map, config.strict_coverage, config.normalized);
    auto report = eval::error_report({profiles});

    ordered_json out;
    out["goldEntries"] = gold.size();
    out["predictions"] = predictions.size();
    out["exactMatches"] = matches;
    out["accuracyPercent"] = accuracy;
    out["bleu"] = bleu;
    out["unparseable"] = unparseable;
    out["strictCoverage"] = config.strict_coverage;
    out["normalized"] = config.normalized;
    out["errorReport"] = report.to_json();
    util::write_file(dir / "eval_report.json", out.dump(2) + "\n");

    std::string depth_tsv = "recursionDepth\tcorrect\ttotal\taccuracyPercent\n";
    for (const auto& [depth, tally] : by_depth) {
        double pct = tally.total == 0 ? 0.0
                                      : 100.0 * static_cast<double>(tally.correct) / tally.total;
        depth_tsv += std::to_string(depth) + "\t" + std::to_string(tally.correct) + "\t" +
                     std::to_string(tally.total) + "\t" + ordered_json(pct).dump() + "\n";
    }
    util::write_file(dir / "accuracy_by_depth.tsv", depth_tsv);

    std::string err_tsv = "category\ttotal\tmeanPerRun\n";
    auto report_json = report.to_json();
    for (const auto& [flag, total] : report_json.at("totals").items())
        err_tsv += flag + "\t" + total.dump() + "\t" +
                   report_json.at("means").at(flag).dump() + "\n";
    util::write_file(dir / "error_categories.tsv", err_tsv);

    write_manifest(dir, "eval", config, manifest_inputs,
                   {dir / "eval_report.json", dir / "accuracy_by_depth.tsv",
                    dir / "error_categories.tsv"});
    std::cerr << "eval: " << matches << "/" << scored << " exact matches, BLEU " << bleu << "\n";
}

}  // namespace kbqa::cli
