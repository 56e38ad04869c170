#include <cstdint>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kbqa/cli/commands.hpp"
#include "kbqa/ground/service.hpp"
#include "kbqa/sparql/parser.hpp"
#include "kbqa/translate/translate.hpp"
#include "kbqa/util.hpp"

namespace {

std::string trim(const std::string& text) {
    auto begin = text.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    auto end = text.find_last_not_of(" \t");
    return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    std::istringstream in(value);
    in >> out;
    if (in.fail() || !in.eof())
        throw kbqa::cli::ConfigError("config key '" + key + "': cannot parse '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw kbqa::cli::ConfigError("config key '" + key + "': expected true, false, 1, or 0, got '" +
                                 value + "'");
}

/// Reads a key=value config file. Blank lines and #-comments are skipped;
/// keys and values are trimmed.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kbqa::cli::ConfigError("cannot open config file: " + path);
    std::vector<std::pair<std::string, std::string>> items;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        auto eq = text.find('=');
        if (eq == std::string::npos)
            throw kbqa::cli::ConfigError(path + ":" + std::to_string(line_no) +
                                         ": expected key=value");
        items.emplace_back(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }
    return items;
}

void assign_config_value(kbqa::cli::RunConfig& config, const std::string& key,
                         const std::string& value) {
    if (key == "input") config.input = value;
    else if (key == "output") config.output = value;
    else if (key == "mapping") config.mapping = value;
    else if (key == "specials") config.specials = value;
    else if (key == "endpoint") config.endpoint = value;
    else if (key == "snapshot") config.snapshot = value;
    else if (key == "labels") config.labels = value;
    else if (key == "predictions") config.predictions = value;
    else if (key == "splits") config.splits = split_csv(value);
    else if (key == "languages") config.languages = split_csv(value);
    else if (key == "seed") config.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "rps") config.rps = parse_number<double>(key, value);
    else if (key == "max-inflight") config.max_inflight = parse_number<int>(key, value);
    else if (key == "timeout") config.timeout = parse_number<int>(key, value);
    else if (key == "deterministic") config.deterministic = parse_bool(key, value);
    else if (key == "strict-coverage") config.strict_coverage = parse_bool(key, value);
    else if (key == "normalized") config.normalized = parse_bool(key, value);
    else if (key == "exclude-specials") config.exclude_specials = parse_bool(key, value);
    else if (key == "negatives") config.negatives = parse_number<double>(key, value);
    else if (key == "max-attempts") config.max_attempts = parse_number<std::size_t>(key, value);
    else if (key == "translator") config.translator = value;
    else if (key == "dictionary") config.dictionary = value;
    else if (key == "mt-url") config.mt_url = value;
    else if (key == "mt-key-env") config.mt_key_env = value;
    else if (key == "replay-cache") config.replay_cache = value;
    else throw kbqa::cli::ConfigError("unknown config key: " + key);
}

/// Applies a key=value config file to the run config. Keys must name long
/// options of the invoked subcommand; options given explicitly on the command
/// line keep their values.
void apply_config_file(CLI::App& cmd, const std::string& path, kbqa::cli::RunConfig& config) {
    if (path.empty()) return;
    for (const auto& [key, value] : read_config_file(path)) {
        auto* opt = cmd.get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw kbqa::cli::ConfigError(path + ": key '" + key +
                                         "' does not name a flag of this command");
        if (opt->count() > 0) continue;
        assign_config_value(config, key, value);
    }
}

/// Exit codes: 0 success, 1 config or I/O error, 2 endpoint or transport
/// failure, 3 data validation failure.
int run(const std::function<void()>& action) {
    try {
        action();
        return 0;
    } catch (const kbqa::cli::ConfigError& e) {
        std::cerr << "kbqa: config error: " << e.what() << "\n";
        return 1;
    } catch (const kbqa::ground::EndpointError& e) {
        std::cerr << "kbqa: endpoint error: " << e.what() << "\n";
        return 2;
    } catch (const kbqa::translate::TranslationFailure& e) {
        std::cerr << "kbqa: translation service error: " << e.what() << "\n";
        return 2;
    } catch (const kbqa::sparql::ParseError& e) {
        std::cerr << "kbqa: validation error: " << e.what() << "\n";
        return 3;
    } catch (const kbqa::sparql::DialectError& e) {
        std::cerr << "kbqa: validation error: " << e.what() << "\n";
        return 3;
    } catch (const kbqa::util::ValidationError& e) {
        std::cerr << "kbqa: validation error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "kbqa: validation error: " << e.what() << "\n";
        return 3;
    } catch (const kbqa::util::IoError& e) {
        std::cerr << "kbqa: I/O error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "kbqa: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Migrate compositional KBQA corpora between knowledge-base schemas, ground "
                 "query patterns against a SPARQL backend, translate questions, induce "
                 "compositional splits, and score predictions."};
    app.require_subcommand(1);

    kbqa::cli::RunConfig config;
    std::string config_path;
    std::function<void()> action;

    auto add_common = [&config, &config_path](CLI::App* cmd) {
        cmd->add_option("--config", config_path,
                        "key=value file mirroring this command's flags; explicit flags win");
        cmd->add_option("--input", config.input, "input file (JSON-lines)");
        cmd->add_option("--output", config.output, "output directory");
        cmd->add_option("--seed", config.seed, "run seed, recorded in the manifest");
    };
    // Defers both the config-file merge and the command so their failures hit
    // run()'s exit-code mapping instead of escaping CLI11's parse.
    auto defer = [&](CLI::App* cmd, void (*fn)(const kbqa::cli::RunConfig&)) {
        cmd->callback([&, cmd, fn] {
            action = [&, cmd, fn] {
                apply_config_file(*cmd, config_path, config);
                fn(config);
            };
        });
    };

    auto* migrate = app.add_subcommand(
        "migrate", "rewrite Freebase-dialect query patterns into the Wikidata dialect");
    add_common(migrate);
    migrate->add_option("--mapping", config.mapping, "property rule table (TSV)");
    migrate->add_option("--specials", config.specials, "special entity map (TSV)");
    defer(migrate, kbqa::cli::cmd_migrate);

    auto* ground = app.add_subcommand(
        "ground", "find satisfying entity assignments and realize English questions");
    add_common(ground);
    ground->add_option("--endpoint", config.endpoint, "SPARQL endpoint URL");
    ground->add_option("--snapshot", config.snapshot, "local triple store (TSV)");
    ground->add_option("--labels", config.labels, "entity labels for the snapshot (TSV)");
    ground->add_option("--languages", config.languages, "label languages to fetch")
        ->delimiter(',');
    ground->add_option("--rps", config.rps, "endpoint requests per second");
    ground->add_option("--max-inflight", config.max_inflight, "concurrent endpoint requests");
    ground->add_option("--timeout", config.timeout, "HTTP timeout in seconds");
    ground->add_flag("--deterministic", config.deterministic,
                     "order probe results so reruns bind identical entities");
    ground->add_option("--negatives", config.negatives,
                       "fraction of yes/no entries to flip to verified-no answers");
    ground->add_option("--max-attempts", config.max_attempts,
                       "candidate probes per negative sampling attempt");
    defer(ground, kbqa::cli::cmd_ground);

    auto* translate =
        app.add_subcommand("translate", "add machine-translated question fields");
    add_common(translate);
    translate->add_option("--languages", config.languages, "target languages plus en")
        ->delimiter(',');
    translate->add_option("--translator", config.translator,
                          "identity, dictionary, or remote");
    translate->add_option("--dictionary", config.dictionary,
                          "phrase table for the dictionary translator (TSV)");
    translate->add_option("--mt-url", config.mt_url, "remote translation service URL");
    translate->add_option("--mt-key-env", config.mt_key_env,
                          "environment variable holding the service API key");
    translate->add_option("--replay-cache", config.replay_cache,
                          "translation replay cache path (JSON-lines)");
    translate->add_option("--max-inflight", config.max_inflight,
                          "concurrent translation jobs");
    translate->add_option("--timeout", config.timeout, "HTTP timeout in seconds");
    defer(translate, kbqa::cli::cmd_translate);

    auto* stats = app.add_subcommand("stats", "dedup statistics over a dataset file");
    add_common(stats);
    defer(stats, kbqa::cli::cmd_stats);

    auto* split = app.add_subcommand(
        "split", "induce train/dev/test splits and the intersection test set");
    add_common(split);
    split->add_option("--splits", config.splits, "source split files (JSON)")->delimiter(',');
    defer(split, kbqa::cli::cmd_split);

    auto* eval = app.add_subcommand("eval", "score a prediction file against gold entries");
    add_common(eval);
    eval->add_option("--predictions", config.predictions, "predictions file (JSON-lines)");
    eval->add_option("--specials", config.specials, "special entity map (TSV)");
    eval->add_flag("--strict-coverage", config.strict_coverage,
                   "count gold entries without a prediction as wrong");
    eval->add_flag("--normalized", config.normalized,
                   "sort clauses before exact-match comparison");
    eval->add_flag("--exclude-specials", config.exclude_specials,
                   "drop special entities from the error-category multisets");
    defer(eval, kbqa::cli::cmd_eval);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    return run(action);
}
