#include "triad/backend.hpp"

#include "httplib.h"
#include "json.hpp"

#include <chrono>
#include <cstdlib>

namespace triad {

using nlohmann::json;

RemoteBackend::RemoteBackend(Options options) : options_(std::move(options)) {
    if (options_.url.empty())
        throw BackendUnavailable("backend: remote endpoint URL not configured");
}

RemoteBackend RemoteBackend::from_environment() {
    Options opt;
    if (const char* url = std::getenv("TRIAD_BACKEND_URL")) opt.url = url;
    if (const char* token = std::getenv("TRIAD_BACKEND_TOKEN")) opt.token = token;
    return RemoteBackend(std::move(opt));
}

namespace {

httplib::Headers auth_headers(const std::string& token) {
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    return headers;
}

}  // namespace

GenerationResponse RemoteBackend::generate(const GenerationRequest& request) const {
    json body{{"role", to_string(request.role)},
              {"prompt", request.prompt},
              {"max_length", request.max_length},
              {"temperature", request.temperature}};
    const std::string payload = body.dump();

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < 2; ++attempt) {
        httplib::Client client(options_.url);
        client.set_connection_timeout(options_.timeout_seconds, 0);
        client.set_read_timeout(options_.timeout_seconds, 0);
        auto res = client.Post("/generate", auth_headers(options_.token), payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "http status " + std::to_string(res->status);
            continue;
        }
        try {
            json j = json::parse(res->body);
            GenerationResponse out;
            out.text = j.at("text").get<std::string>();
            if (j.contains("value") && !j.at("value").is_null())
                out.value = j.at("value").get<double>();
            return out;
        } catch (const json::exception& e) {
            last_error = std::string("malformed response: ") + e.what();
        }
    }
    throw BackendUnavailable("backend: remote generate failed after retry (" + last_error + ")");
}

HealthStatus RemoteBackend::healthcheck() const {
    const auto start = std::chrono::steady_clock::now();
    httplib::Client client(options_.url);
    client.set_connection_timeout(options_.timeout_seconds, 0);
    client.set_read_timeout(options_.timeout_seconds, 0);
    auto res = client.Get("/health", auth_headers(options_.token));
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
    if (!res) return {false, "transport error: " + httplib::to_string(res.error()), elapsed.count()};
    if (res->status != 200) return {false, "http status " + std::to_string(res->status), elapsed.count()};
    return {true, "ok", elapsed.count()};
}

}  // namespace triad
