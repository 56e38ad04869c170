#include "kbqa/ground/http_endpoint.hpp"

#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "kbqa/util.hpp"

namespace kbqa::ground {

using nlohmann::json;

namespace {

/// Strips a Wikidata IRI down to its trailing code; literals pass through.
std::string strip_iri(const std::string& value) {
    auto cut = value.find_last_of("/#");
    if (cut == std::string::npos) return value;
    return value.substr(cut + 1);
}

struct SlotGuard {
    std::mutex& mutex;
    std::condition_variable& cv;
    int& count;
    ~SlotGuard() {
        {
            std::lock_guard lk(mutex);
            --count;
        }
        cv.notify_one();
    }
};

}  // namespace

HttpEndpoint::HttpEndpoint(EndpointConfig config) : config_(std::move(config)) {
    auto scheme_end = config_.url.find("://");
    if (scheme_end == std::string::npos)
        throw util::ValidationError("endpoint URL must start with http:// or https://: " +
                                    config_.url);
    auto path_start = config_.url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        scheme_host_ = config_.url;
        path_ = "/";
    } else {
        scheme_host_ = config_.url.substr(0, path_start);
        path_ = config_.url.substr(path_start);
    }
    if (config_.max_inflight < 1)
        throw util::ValidationError("max_inflight must be at least 1");
}

void HttpEndpoint::pace() {
    if (config_.requests_per_second <= 0) return;
    const auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / config_.requests_per_second));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lk(pace_mutex_);
        const auto now = std::chrono::steady_clock::now();
        if (next_slot_ < now) next_slot_ = now;
        slot = next_slot_;
        next_slot_ += interval;
    }
    std::this_thread::sleep_until(slot);
}

std::string HttpEndpoint::fetch(const std::string& query_text) {
    std::unique_lock lk(inflight_mutex_);
    inflight_cv_.wait(lk, [this] { return inflight_ < config_.max_inflight; });
    ++inflight_;
    lk.unlock();
    SlotGuard guard{inflight_mutex_, inflight_cv_, inflight_};

    const httplib::Params params{{"query", query_text}, {"format", "json"}};
    const httplib::Headers headers{{"Accept", "application/sparql-results+json"}};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(100) * (1 << (attempt - 1)));
        pace();
        httplib::Client client(scheme_host_);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);
        client.set_follow_location(true);
        auto res = client.Get(path_, params, headers);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200)
            throw EndpointStatusError(res->status, "endpoint returned status " +
                                                       std::to_string(res->status) + " for " +
                                                       scheme_host_ + path_);
        return res->body;
    }
    throw TransportError("endpoint unreachable after " + std::to_string(config_.retries + 1) +
                         " attempts: " + last_error);
}

QueryResult HttpEndpoint::parse_results(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
    }
    if (!doc.is_object()) throw MalformedResponseError("response is not a JSON object");
    QueryResult result;
    if (doc.contains("boolean")) {
        if (!doc["boolean"].is_boolean())
            throw MalformedResponseError("boolean field is not a boolean");
        result.is_boolean = true;
        result.boolean = doc["boolean"].get<bool>();
        return result;
    }
    if (!doc.contains("results") || !doc["results"].is_object() ||
        !doc["results"].contains("bindings") || !doc["results"]["bindings"].is_array())
        throw MalformedResponseError("response has neither boolean nor results.bindings");
    for (const auto& binding : doc["results"]["bindings"]) {
        if (!binding.is_object())
            throw MalformedResponseError("binding entry is not an object");
        std::map<std::string, std::string> row;
        for (const auto& [var, cell] : binding.items()) {
            if (!cell.is_object() || !cell.contains("value") || !cell["value"].is_string())
                throw MalformedResponseError("binding for ?" + var + " has no string value");
            std::string value = cell["value"].get<std::string>();
            if (cell.value("type", "") == "uri") value = strip_iri(value);
            row.emplace(var, std::move(value));
        }
        result.rows.push_back(std::move(row));
    }
    return result;
}

QueryResult HttpEndpoint::execute(const sparql::Query& q) {
    sparql::check_query(q);
    if (q.dialect != sparql::Dialect::Wikidata)
        throw util::ValidationError("endpoint queries must use the Wikidata dialect");
    auto result = parse_results(fetch(sparql::serialize_query(q)));
    if (q.form == sparql::QueryForm::Ask && !result.is_boolean)
        throw MalformedResponseError("ASK query answered with bindings instead of a boolean");
    if (q.form != sparql::QueryForm::Ask && result.is_boolean)
        throw MalformedResponseError("SELECT query answered with a boolean");
    return result;
}

std::optional<std::string> HttpEndpoint::label(const std::string& qcode,
                                               const std::string& lang) {
    if (!sparql::is_qcode(qcode))
        throw util::ValidationError("label lookup needs a Q-code, got " + qcode);
    for (char c : lang)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-')
            throw util::ValidationError("malformed language tag: " + lang);
    const std::string text = "SELECT ?label WHERE { wd:" + qcode +
                             " rdfs:label ?label . FILTER ( LANG ( ?label ) = \"" + lang +
                             "\" ) } LIMIT 1";
    auto result = parse_results(fetch(text));
    if (result.is_boolean)
        throw MalformedResponseError("label query answered with a boolean");
    if (result.rows.empty()) return std::nullopt;
    auto cell = result.rows[0].find("label");
    if (cell == result.rows[0].end())
        throw MalformedResponseError("label query answered without a ?label column");
    return cell->second;
}

}  // namespace kbqa::ground
