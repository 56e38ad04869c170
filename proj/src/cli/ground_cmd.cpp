#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>

#include "common.hpp"
#include "kbqa/cli/commands.hpp"
#include "kbqa/cli/manifest.hpp"
#include "kbqa/digest.hpp"
#include "kbqa/ground/grounding.hpp"
#include "kbqa/ground/http_endpoint.hpp"
#include "kbqa/sparql/parser.hpp"
#include "kbqa/util.hpp"

namespace kbqa::cli {

using nlohmann::ordered_json;
using util::ValidationError;

namespace {

/// Independent engine per entry, so resumed runs and reordered inputs draw
/// the same negative-sampling decisions. The multiplier spreads consecutive
/// ids across the seed space.
std::mt19937_64 entry_rng(std::uint64_t seed, std::int64_t id) {
    return std::mt19937_64(seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(id) + 1)));
}

/// Uniform draw in [0, 1) from the top 53 bits; avoids the implementation-
/// defined std::uniform_real_distribution.
double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// One stage-one survivor: the pattern, its satisfying assignment with
/// labels, the concrete query, and the expected response. Serialized into
/// the intermediate grounded file so stage two can resume without re-probing.
struct GroundedRecord {
    PatternEntry pattern;
    std::string sparql;
    ground::Binding binding;
    nlohmann::json expected;

    ordered_json to_json() const {
        auto out = pattern.to_json();
        out["sparql"] = sparql;
        auto assignments = ordered_json::array();
        for (const auto& [placeholder, qcode] : binding.assignments)
            assignments.push_back({placeholder, qcode});
        out["assignments"] = assignments;
        auto labels = ordered_json::object();
        for (const auto& [qcode, by_lang] : binding.labels) {
            auto node = ordered_json::object();
            for (const auto& [lang, text] : by_lang) node[lang] = text;
            labels[qcode] = node;
        }
        out["labels"] = labels;
        out["expectedResponse"] = expected;
        return out;
    }

    static GroundedRecord from_json(const nlohmann::json& j) {
        GroundedRecord rec;
        rec.pattern = PatternEntry::from_json(j);
        rec.sparql = j.at("sparql").get<std::string>();
        for (const auto& pair : j.at("assignments"))
            rec.binding.assignments.emplace_back(pair.at(0).get<std::string>(),
                                                 pair.at(1).get<std::string>());
        for (const auto& [qcode, by_lang] : j.at("labels").items())
            for (const auto& [lang, text] : by_lang.items())
                rec.binding.labels[qcode][lang] = text.get<std::string>();
        rec.expected = j.at("expectedResponse");
        return rec;
    }
};

/// Progress of an interrupted run. stage is "ground" (probing patterns) or
/// "negatives" (flipping answers and realizing questions); next is the first
/// unprocessed index within that stage.
struct Checkpoint {
    std::string input_digest;
    std::string stage = "ground";
    std::size_t next = 0;
    std::vector<std::int64_t> no_assignment_ids;
    std::vector<std::int64_t> label_missing_ids;
    std::size_t negatives_converted = 0;
    std::size_t negatives_exhausted = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    ordered_json j;
    j["inputDigest"] = ck.input_digest;
    j["stage"] = ck.stage;
    j["next"] = ck.next;
    j["noAssignmentIds"] = ck.no_assignment_ids;
    j["labelMissingIds"] = ck.label_missing_ids;
    j["negativesConverted"] = ck.negatives_converted;
    j["negativesExhausted"] = ck.negatives_exhausted;
    util::write_file(path, j.dump() + "\n");
}

Checkpoint load_or_init_checkpoint(const std::filesystem::path& path,
                                   const std::string& input_digest) {
    Checkpoint ck;
    ck.input_digest = input_digest;
    if (!std::filesystem::exists(path)) return ck;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(util::read_file(path));
        ck.input_digest = j.at("inputDigest").get<std::string>();
        ck.stage = j.at("stage").get<std::string>();
        ck.next = j.at("next").get<std::size_t>();
        ck.no_assignment_ids = j.at("noAssignmentIds").get<std::vector<std::int64_t>>();
        ck.label_missing_ids = j.at("labelMissingIds").get<std::vector<std::int64_t>>();
        ck.negatives_converted = j.at("negativesConverted").get<std::size_t>();
        ck.negatives_exhausted = j.at("negativesExhausted").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": unreadable checkpoint: " + e.what());
    }
    if (ck.input_digest != input_digest)
        throw ValidationError(path.string() +
                              ": checkpoint belongs to a different input file; remove it or "
                              "point --output at a fresh directory");
    std::cerr << "ground: resuming from checkpoint (stage " << ck.stage << ", index " << ck.next
              << ")\n";
    return ck;
}

/// Rows of a wh-query result as a JSON value: a sorted list of values for a
/// single projected variable, else a sorted list of variable-keyed objects.
nlohmann::json rows_to_response(const sparql::Query& q, const ground::QueryResult& result) {
    if (q.projected.size() == 1) {
        std::vector<std::string> values;
        for (const auto& row : result.rows) {
            auto it = row.find(q.projected[0].text);
            if (it != row.end()) values.push_back(it->second);
        }
        std::sort(values.begin(), values.end());
        return nlohmann::json(values);
    }
    std::vector<ordered_json> rows;
    for (const auto& row : result.rows) {
        ordered_json obj;
        for (const auto& var : q.projected) {
            auto it = row.find(var.text);
            if (it != row.end()) obj[var.text] = it->second;
        }
        rows.push_back(std::move(obj));
    }
    std::sort(rows.begin(), rows.end(),
              [](const ordered_json& a, const ordered_json& b) { return a.dump() < b.dump(); });
    return nlohmann::json(rows);
}

/// Append-mode stream opened on first use, so completed or empty runs never
/// recreate a partial file.
class LazyAppender {
  public:
    explicit LazyAppender(std::filesystem::path path) : path_(std::move(path)) {}

    void append_line(const std::string& line) {
        if (!stream_.is_open()) {
            stream_.open(path_, std::ios::binary | std::ios::app);
            if (!stream_) throw util::IoError("cannot open " + path_.string());
        }
        stream_ << line << "\n";
        stream_.flush();
    }

  private:
    std::filesystem::path path_;
    std::ofstream stream_;
};

}  // namespace

void cmd_ground(const RunConfig& config) {
    auto input = require_input_path(config);
    auto dir = require_output_path(config);
    bool has_endpoint = !config.endpoint.empty();
    bool has_snapshot = !config.snapshot.empty();
    if (has_endpoint == has_snapshot)
        throw ConfigError("ground needs exactly one of --endpoint and --snapshot");
    if (has_snapshot && config.labels.empty())
        throw ConfigError("snapshot mode needs --labels to realize question text");
    util::LockFile lock(dir);

    std::unique_ptr<ground::QueryService> service;
    if (has_snapshot) {
        service = std::make_unique<ground::SnapshotService>(
            ground::TripleStoreSnapshot::load(config.snapshot, config.labels));
    } else {
        ground::EndpointConfig endpoint;
        endpoint.url = config.endpoint;
        endpoint.requests_per_second = config.rps;
        endpoint.max_inflight = config.max_inflight;
        endpoint.timeout_seconds = config.timeout;
        service = std::make_unique<ground::HttpEndpoint>(endpoint);
    }

    auto patterns = read_patterns(input);
    auto checkpoint_path = dir / "checkpoint.json";
    auto grounded_path = dir / "grounded.partial.jsonl";
    auto partial_path = dir / "dataset.partial.jsonl";
    auto ck = load_or_init_checkpoint(checkpoint_path, util::sha256_file(input));
    if (ck.stage == "ground" && ck.next == 0) {
        // Fresh start (saved checkpoints always record progress): drop
        // intermediates a checkpoint-less earlier run may have left behind.
        std::error_code ec;
        std::filesystem::remove(grounded_path, ec);
        std::filesystem::remove(partial_path, ec);
    }

    // Stage one: probe every pattern, keep the satisfying assignments and the
    // expected responses. Endpoint failures propagate after the checkpoint
    // has recorded all completed work.
    if (ck.stage == "ground") {
        LazyAppender grounded_out(grounded_path);
        for (std::size_t i = ck.next; i < patterns.size(); ++i) {
            const auto& pattern = patterns[i];
            auto query = sparql::parse_query(pattern.sparql_pattern, sparql::Dialect::Wikidata);
            auto binding =
                ground::ground_pattern(query, *service, config.languages, config.deterministic);
            if (!binding) {
                ck.no_assignment_ids.push_back(pattern.id);
            } else {
                GroundedRecord rec;
                rec.pattern = pattern;
                rec.binding = *binding;
                auto concrete = sparql::bind_placeholders(query, binding->as_terms());
                rec.sparql = sparql::serialize_query(concrete);
                if (pattern.kind == dataset::QuestionKind::YesNo) {
                    // The probe already proved satisfiability, so the answer
                    // is yes until negative sampling flips it.
                    rec.expected = true;
                } else {
                    rec.expected = rows_to_response(concrete, service->execute(concrete));
                }
                grounded_out.append_line(rec.to_json().dump());
            }
            ck.next = i + 1;
            save_checkpoint(checkpoint_path, ck);
        }
        ck.stage = "negatives";
        ck.next = 0;
        save_checkpoint(checkpoint_path, ck);
    }

    // Stage two: decide per yes/no entry whether to flip it, verify the swap
    // against the service, realize the bracketed English question, and emit
    // the final record. Also checkpointed: negative probes hit the endpoint.
    std::vector<GroundedRecord> records;
    if (std::filesystem::exists(grounded_path)) {
        auto lines = util::read_jsonl(grounded_path);
        records.reserve(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) {
            try {
                records.push_back(GroundedRecord::from_json(lines[i]));
            } catch (const std::exception& e) {
                throw ValidationError(grounded_path.string() + ": record " +
                                      std::to_string(i + 1) + ": " + e.what());
            }
        }
    }

    std::vector<sparql::Query> concretes;
    concretes.reserve(records.size());
    for (const auto& rec : records)
        concretes.push_back(sparql::parse_query(rec.sparql, sparql::Dialect::Wikidata));
    auto pools = ground::build_predicate_pools(concretes);

    {
        LazyAppender dataset_out(partial_path);
        for (std::size_t j = ck.next; j < records.size(); ++j) {
            const auto& rec = records[j];
            auto concrete = concretes[j];
            auto binding = rec.binding;
            nlohmann::json expected = rec.expected;

            if (rec.pattern.kind == dataset::QuestionKind::YesNo && config.negatives > 0.0) {
                auto rng = entry_rng(config.seed, rec.pattern.id);
                if (unit_draw(rng) < config.negatives) {
                    auto pattern_q = sparql::parse_query(rec.pattern.sparql_pattern,
                                                         sparql::Dialect::Wikidata);
                    auto sample = ground::negative_sample(concrete, pattern_q, pools, *service,
                                                          rng, config.max_attempts);
                    if (sample) {
                        concrete = sample->query;
                        for (auto& [placeholder, qcode] : binding.assignments)
                            if (placeholder == sample->placeholder)
                                qcode = sample->replacement_entity;
                        for (const auto& lang : config.languages)
                            if (auto text = service->label(sample->replacement_entity, lang))
                                binding.labels[sample->replacement_entity][lang] = *text;
                        expected = false;
                        ++ck.negatives_converted;
                    } else {
                        ++ck.negatives_exhausted;
                    }
                }
            }

            dataset::DatasetEntry entry;
            entry.id = rec.pattern.id;
            entry.question_kind = rec.pattern.kind;
            entry.question_pattern_mod_entities = rec.pattern.question_pattern;
            entry.sparql = sparql::serialize_query(concrete);
            entry.sparql_pattern_mod_entities = rec.pattern.sparql_pattern;
            entry.recursion_depth = rec.pattern.recursion_depth;
            entry.expected_response = expected;
            bool realized = true;
            try {
                entry.question_with_brackets["en"] = ground::realize_question(
                    rec.pattern.question_pattern.at("en"), binding, "en");
            } catch (const std::exception&) {
                realized = false;
            }
            if (realized) {
                dataset_out.append_line(entry.to_json().dump());
            } else {
                ck.label_missing_ids.push_back(rec.pattern.id);
            }
            ck.next = j + 1;
            save_checkpoint(checkpoint_path, ck);
        }
    }

    auto dataset_path = dir / "dataset.jsonl";
    if (std::filesystem::exists(partial_path)) {
        std::filesystem::rename(partial_path, dataset_path);
    } else if (!std::filesystem::exists(dataset_path)) {
        util::write_file(dataset_path, "");
    }

    ordered_json report;
    report["total"] = patterns.size();
    report["grounded"] = records.size();
    report["emitted"] = records.size() - ck.label_missing_ids.size();
    report["noAssignment"] = {{"count", ck.no_assignment_ids.size()},
                              {"ids", ck.no_assignment_ids}};
    report["labelMissing"] = {{"count", ck.label_missing_ids.size()},
                              {"ids", ck.label_missing_ids}};
    report["negatives"] = {{"fraction", config.negatives},
                           {"converted", ck.negatives_converted},
                           {"exhausted", ck.negatives_exhausted}};
    util::write_file(dir / "grounding_report.json", report.dump(2) + "\n");

    std::vector<std::filesystem::path> manifest_inputs{input};
    if (has_snapshot) {
        manifest_inputs.emplace_back(config.snapshot);
        manifest_inputs.emplace_back(config.labels);
    }
    write_manifest(dir, "ground", config, manifest_inputs,
                   {dataset_path, dir / "grounding_report.json"});

    std::error_code ec;
    std::filesystem::remove(checkpoint_path, ec);
    std::filesystem::remove(grounded_path, ec);
    std::cerr << "ground: " << (records.size() - ck.label_missing_ids.size()) << "/"
              << patterns.size() << " entries grounded, " << ck.negatives_converted
              << " negatives\n";
}

}  // namespace kbqa::cli
