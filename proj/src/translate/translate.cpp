#include "kbqa/translate/translate.hpp"

#include <cstdlib>
#include <fstream>

#include "httplib.h"
#include "json.hpp"
#include "kbqa/util.hpp"

namespace kbqa::translate {

using nlohmann::json;
using util::ValidationError;

std::vector<std::string> TranslationClient::translate_batch(
    const std::vector<std::string>& texts, const std::string& source_lang,
    const std::string& target_lang) {
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const auto& text : texts) out.push_back(translate(text, source_lang, target_lang));
    return out;
}

void DictionaryClient::add(const std::string& input, const std::string& target_lang,
                           const std::string& output) {
    table_[{input, target_lang}] = output;
}

std::string DictionaryClient::translate(const std::string& text, const std::string&,
                                        const std::string& target_lang) {
    auto it = table_.find({text, target_lang});
    if (it == table_.end())
        throw TranslationFailure("no dictionary entry for \"" + text + "\" in " + target_lang);
    return it->second;
}

ReplayCache::ReplayCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) return;
    for (const auto& record : util::read_jsonl(path_)) {
        if (!record.is_object() || !record.contains("source") || !record.contains("target_lang") ||
            !record.contains("input") || !record.contains("output"))
            throw ValidationError(path_.string() + ": replay rows need source, target_lang, "
                                                   "input, output");
        entries_[{record["input"].get<std::string>(), record["source"].get<std::string>(),
                  record["target_lang"].get<std::string>()}] =
            record["output"].get<std::string>();
    }
}

std::optional<std::string> ReplayCache::lookup(const std::string& input,
                                               const std::string& source_lang,
                                               const std::string& target_lang) const {
    std::lock_guard lk(mutex_);
    auto it = entries_.find({input, source_lang, target_lang});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ReplayCache::insert(const std::string& input, const std::string& source_lang,
                         const std::string& target_lang, const std::string& output) {
    std::lock_guard lk(mutex_);
    auto [it, inserted] = entries_.emplace(std::tuple{input, source_lang, target_lang}, output);
    if (!inserted) return;
    nlohmann::ordered_json record;
    record["source"] = source_lang;
    record["target_lang"] = target_lang;
    record["input"] = input;
    record["output"] = output;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw util::IoError("cannot append to replay cache " + path_.string());
    out << record.dump() << '\n';
}

RemoteClient::RemoteClient(RemoteConfig config, ReplayCache* cache)
    : config_(std::move(config)), cache_(cache) {
    if (config_.url.find("://") == std::string::npos)
        throw ValidationError("translation service URL must start with http:// or https://: " +
                              config_.url);
    if (config_.batch_size == 0) throw ValidationError("batch_size must be positive");
}

std::vector<std::string> RemoteClient::request(const std::vector<std::string>& texts,
                                               const std::string& source_lang,
                                               const std::string& target_lang) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw TranslationFailure("environment variable " + config_.api_key_env +
                                 " is not set; refusing to call the translation service");

    const auto path_start = config_.url.find('/', config_.url.find("://") + 3);
    const std::string host =
        path_start == std::string::npos ? config_.url : config_.url.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
    path += (path.find('?') == std::string::npos ? "?key=" : "&key=") + std::string(key);

    json body;
    body["q"] = texts;
    body["source"] = source_lang;
    body["target"] = target_lang;
    body["format"] = "text";

    httplib::Client client(host);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res)
        throw TranslationFailure("translation service unreachable: " +
                                 httplib::to_string(res.error()));
    if (res->status != 200)
        throw TranslationFailure("translation service returned status " +
                                 std::to_string(res->status));
    json doc;
    try {
        doc = json::parse(res->body);
    } catch (const json::exception& e) {
        throw TranslationFailure(std::string("translation response is not JSON: ") + e.what());
    }
    if (!doc.contains("data") || !doc["data"].contains("translations") ||
        !doc["data"]["translations"].is_array() ||
        doc["data"]["translations"].size() != texts.size())
        throw TranslationFailure("translation response shape mismatch");
    std::vector<std::string> out;
    for (const auto& t : doc["data"]["translations"]) {
        if (!t.contains("translatedText") || !t["translatedText"].is_string())
            throw TranslationFailure("translation row lacks translatedText");
        out.push_back(t["translatedText"].get<std::string>());
    }
    return out;
}

std::string RemoteClient::translate(const std::string& text, const std::string& source_lang,
                                    const std::string& target_lang) {
    return translate_batch({text}, source_lang, target_lang).front();
}

std::vector<std::string> RemoteClient::translate_batch(const std::vector<std::string>& texts,
                                                       const std::string& source_lang,
                                                       const std::string& target_lang) {
    std::vector<std::string> out(texts.size());
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto hit = cache_ ? cache_->lookup(texts[i], source_lang, target_lang) : std::nullopt;
        if (hit)
            out[i] = *hit;
        else
            pending.push_back(i);
    }
    for (std::size_t start = 0; start < pending.size(); start += config_.batch_size) {
        const std::size_t end = std::min(pending.size(), start + config_.batch_size);
        std::vector<std::string> chunk;
        for (std::size_t k = start; k < end; ++k) chunk.push_back(texts[pending[k]]);
        auto translated = request(chunk, source_lang, target_lang);
        for (std::size_t k = start; k < end; ++k) {
            out[pending[k]] = translated[k - start];
            if (cache_)
                cache_->insert(texts[pending[k]], source_lang, target_lang, translated[k - start]);
        }
    }
    return out;
}

namespace {

const std::vector<std::string> kTerminalMarks = {"?", "\xEF\xBC\x9F", "\xD8\x9F"};

bool ends_with(const std::string& text, const std::string& suffix) {
    return text.size() >= suffix.size() &&
           text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string rtrim(std::string text) {
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
        text.pop_back();
    return text;
}

}  // namespace

std::string prepare_for_mt(const std::string& question) {
    for (const auto& mark : kTerminalMarks)
        if (ends_with(question, mark))
            throw ValidationError("question already ends with a question mark: " + question);
    if (!question.empty() && std::isspace(static_cast<unsigned char>(question.back())))
        throw ValidationError("question has trailing whitespace: " + question);
    return question + "?";
}

std::string postprocess_mt(const std::string& translated) {
    std::string out = rtrim(translated);
    for (const auto& mark : kTerminalMarks) {
        if (ends_with(out, mark)) {
            out.resize(out.size() - mark.size());
            break;
        }
    }
    return rtrim(out);
}

std::multiset<std::string> question_placeholders(const std::string& text) {
    std::multiset<std::string> out;
    for (const auto& span : util::placeholder_spans(text))
        out.insert(text.substr(span.offset, span.length));
    return out;
}

bool brackets_balanced(const std::string& text) {
    int depth = 0;
    for (char c : text) {
        if (c == '[') ++depth;
        if (c == ']' && --depth < 0) return false;
    }
    return depth == 0;
}

TranslationOutcome translate_entry(const dataset::DatasetEntry& entry, TranslationClient& client,
                                   const std::vector<std::string>& targets,
                                   const std::string& source_lang) {
    auto pattern_it = entry.question_pattern_mod_entities.find(source_lang);
    auto bracketed_it = entry.question_with_brackets.find(source_lang);
    if (pattern_it == entry.question_pattern_mod_entities.end() ||
        bracketed_it == entry.question_with_brackets.end())
        throw ValidationError("entry " + std::to_string(entry.id) + " lacks " + source_lang +
                              " question fields");

    TranslationOutcome outcome;
    outcome.entry = entry;
    const auto expected = question_placeholders(pattern_it->second);

    std::set<std::string> failed, flagged;
    for (const auto& target : targets) {
        if (target == source_lang) continue;
        try {
            auto pattern = postprocess_mt(
                client.translate(prepare_for_mt(pattern_it->second), source_lang, target));
            if (question_placeholders(pattern) != expected)
                flagged.insert(target);
            else
                outcome.entry.question_pattern_mod_entities[target] = pattern;
        } catch (const TranslationFailure&) {
            failed.insert(target);
        }
        try {
            auto bracketed = postprocess_mt(
                client.translate(prepare_for_mt(bracketed_it->second), source_lang, target));
            if (!brackets_balanced(bracketed))
                flagged.insert(target);
            else
                outcome.entry.question_with_brackets[target] = bracketed;
        } catch (const TranslationFailure&) {
            failed.insert(target);
        }
    }
    outcome.failed_languages.assign(failed.begin(), failed.end());
    outcome.flagged_languages.assign(flagged.begin(), flagged.end());
    return outcome;
}

}  // namespace kbqa::translate
