#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kbqa/dataset/dataset.hpp"

namespace kbqa::translate {

/// Raised when a translation backend cannot produce output for a request.
class TranslationFailure : public std::runtime_error {
  public:
    explicit TranslationFailure(const std::string& msg) : std::runtime_error(msg) {}
};

/// Machine translation backend. translate_batch defaults to a per-text loop;
/// backends with native batching override it.
class TranslationClient {
  public:
    virtual ~TranslationClient() = default;
    virtual std::string translate(const std::string& text, const std::string& source_lang,
                                  const std::string& target_lang) = 0;
    virtual std::vector<std::string> translate_batch(const std::vector<std::string>& texts,
                                                     const std::string& source_lang,
                                                     const std::string& target_lang);
};

/// Returns the input unchanged; useful for pipeline tests.
class IdentityClient final : public TranslationClient {
  public:
    std::string translate(const std::string& text, const std::string&,
                          const std::string&) override {
        return text;
    }
};

/// Phrase table lookup: exact input text to output per target language.
/// Unknown phrases raise TranslationFailure, like a remote service would.
class DictionaryClient final : public TranslationClient {
  public:
    void add(const std::string& input, const std::string& target_lang,
             const std::string& output);
    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang) override;

  private:
    std::map<std::pair<std::string, std::string>, std::string> table_;
};

/// Persistent request/response store so corpus regeneration never re-asks
/// the service for a text it has seen. Keyed by (input, source, target).
/// JSON-lines rows: {"source": .., "target_lang": .., "input": .., "output": ..}.
class ReplayCache {
  public:
    /// Loads the cache file when it exists; appends through the same path.
    explicit ReplayCache(std::filesystem::path path);

    std::optional<std::string> lookup(const std::string& input, const std::string& source_lang,
                                      const std::string& target_lang) const;
    /// Records and persists one pair (append, serialized by a mutex).
    void insert(const std::string& input, const std::string& source_lang,
                const std::string& target_lang, const std::string& output);
    std::size_t size() const { return entries_.size(); }

  private:
    std::filesystem::path path_;
    std::map<std::tuple<std::string, std::string, std::string>, std::string> entries_;
    mutable std::mutex mutex_;
};

/// Settings for the HTTP translation service adapter. The API key is read
/// from the named environment variable at request time and never written to
/// any file.
struct RemoteConfig {
    std::string url;                              ///< service endpoint
    std::string api_key_env = "KBQA_MT_API_KEY";  ///< env var holding the credential
    std::size_t batch_size = 16;                  ///< texts per request
    int timeout_seconds = 30;
};

/// Adapter for a Cloud-Translation-style JSON API, fronted by a ReplayCache.
/// Requests POST {"q": [texts], "source": .., "target": .., "format": "text"}
/// and read {"data": {"translations": [{"translatedText": ..}, ..]}}.
class RemoteClient final : public TranslationClient {
  public:
    RemoteClient(RemoteConfig config, ReplayCache* cache);

    std::string translate(const std::string& text, const std::string& source_lang,
                          const std::string& target_lang) override;
    std::vector<std::string> translate_batch(const std::vector<std::string>& texts,
                                             const std::string& source_lang,
                                             const std::string& target_lang) override;

  private:
    std::vector<std::string> request(const std::vector<std::string>& texts,
                                     const std::string& source_lang,
                                     const std::string& target_lang);
    RemoteConfig config_;
    ReplayCache* cache_;
};

/// Appends the question mark the MT protocol expects. Rejects input that
/// already ends with one (or with trailing whitespace) so marks never double.
std::string prepare_for_mt(const std::string& question);

/// Strips one trailing question mark ("?", fullwidth "？", or Arabic "؟")
/// and trailing whitespace from MT output.
std::string postprocess_mt(const std::string& translated);

/// Placeholder mentions of a question text as a multiset of surfaces.
std::multiset<std::string> question_placeholders(const std::string& text);

/// True when '[' and ']' pair up left to right.
bool brackets_balanced(const std::string& text);

/// Per-entry translation outcome. Flagged languages failed validation
/// (placeholder loss or bracket imbalance); failed languages hit a client
/// error. Either list being non-empty means the entry must not enter the
/// dataset output.
struct TranslationOutcome {
    dataset::DatasetEntry entry;
    std::vector<std::string> failed_languages;
    std::vector<std::string> flagged_languages;
    bool clean() const { return failed_languages.empty() && flagged_languages.empty(); }
};

/// Translates the entry's English pattern and bracketed question into each
/// target language, separately per field. Pattern translations must keep the
/// placeholder multiset; bracketed translations must keep brackets balanced.
/// SPARQL fields are never touched.
TranslationOutcome translate_entry(const dataset::DatasetEntry& entry, TranslationClient& client,
                                   const std::vector<std::string>& targets,
                                   const std::string& source_lang = "en");

}  // namespace kbqa::translate
