#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace kbqa::util {

/// File or OS level failure (missing file, unwritable directory, ...).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input data violates a documented contract (bad entry, id collision, ...).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(std::string_view text, char sep);
std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower(std::string_view text);
bool iequals(std::string_view a, std::string_view b);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// One data row of a TSV file; comment (#) and blank lines are skipped.
struct TsvRow {
    std::vector<std::string> fields;
    std::size_t line_number = 0;
};

std::vector<TsvRow> read_tsv(const std::filesystem::path& path);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

/// Byte range of one placeholder mention (M plus digits) in question text.
struct TokenSpan {
    std::size_t offset = 0;
    std::size_t length = 0;
};

/// Finds placeholder mentions: 'M' followed by a maximal digit run, not glued
/// to a preceding ASCII letter or digit. Matches anywhere so unspaced scripts
/// (e.g. Chinese) work.
std::vector<TokenSpan> placeholder_spans(std::string_view text);
void write_jsonl(const std::filesystem::path& path,
                 const std::vector<nlohmann::ordered_json>& records);

/// Draw an index in [0, n) from the engine. The draw is pinned to a plain
/// modulo so identical seeds give identical sequences on every platform
/// (std::uniform_int_distribution is implementation-defined).
std::size_t pick_index(std::mt19937_64& rng, std::size_t n);

/// Fisher-Yates shuffle built on pick_index, for reproducible sampling.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = pick_index(rng, i);
        std::swap(items[i - 1], items[j]);
    }
}

/// Guards an output directory against concurrent command runs. The lock file
/// is created exclusively and removed on destruction.
class LockFile {
public:
    explicit LockFile(const std::filesystem::path& directory);
    ~LockFile();
    LockFile(const LockFile&) = delete;
    LockFile& operator=(const LockFile&) = delete;

private:
    std::filesystem::path path_;
    bool held_ = false;
};

/// Runs fn(0..n-1) on up to max_workers threads. Exceptions are rethrown on
/// the calling thread; results must be written by index so output order does
/// not depend on scheduling.
void parallel_for(std::size_t n, std::size_t max_workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace kbqa::util
