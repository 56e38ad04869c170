#include "kbqa/util.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace kbqa::util {

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(text.substr(start));
            return out;
        }
        out.emplace_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string to_lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TsvRow> read_tsv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<TsvRow> rows;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        rows.push_back(TsvRow{split(line, '\t'), line_number});
    }
    return rows;
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<nlohmann::json> records;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_number) +
                                  ": bad JSON: " + e.what());
        }
    }
    return records;
}

void write_jsonl(const fs::path& path, const std::vector<nlohmann::ordered_json>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& record : records) {
        out << record.dump() << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<TokenSpan> placeholder_spans(std::string_view text) {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    auto is_alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
    while (i < text.size()) {
        const bool boundary = i == 0 || !is_alnum(text[i - 1]);
        if (boundary && text[i] == 'M' && i + 1 < text.size() && is_digit(text[i + 1])) {
            std::size_t j = i + 1;
            while (j < text.size() && is_digit(text[j])) ++j;
            spans.push_back(TokenSpan{i, j - i});
            i = j;
        } else {
            ++i;
        }
    }
    return spans;
}

std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
    if (n == 0) throw std::invalid_argument("pick_index: empty range");
    return static_cast<std::size_t>(rng() % n);
}

LockFile::LockFile(const fs::path& directory) : path_(directory / ".kbqa.lock") {
    fs::create_directories(directory);
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST) {
            throw IoError("output directory is locked by another run: " + path_.string() +
                          " (remove the file if the previous run crashed)");
        }
        throw IoError("cannot create lock file " + path_.string());
    }
    ::close(fd);
    held_ = true;
}

LockFile::~LockFile() {
    if (held_) {
        std::error_code ec;
        fs::remove(path_, ec);
    }
}

void parallel_for(std::size_t n, std::size_t max_workers,
                  const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = std::max<std::size_t>(1, std::min(max_workers, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                while (true) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= n) return;
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
                next.store(n);
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace kbqa::util
