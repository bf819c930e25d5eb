#include <cstdlib>

#include "dforge/llm/gateway.hpp"
#include "httplib.h"
#include "json.hpp"

using nlohmann::json;

namespace dforge::llm {

namespace {

// splits http://host:port/path into (scheme://host:port, /path)
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    std::size_t scheme = endpoint.find("://");
    std::size_t path_start =
        scheme == std::string::npos ? endpoint.find('/') : endpoint.find('/', scheme + 3);
    if (path_start == std::string::npos) return {endpoint, "/v1/chat/completions"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

HttpModel::HttpModel(HttpModelConfig config)
    : config_(std::move(config)), limiter_(config_.rpm > 0 ? config_.rpm : 60.0) {}

std::vector<std::string> HttpModel::generate_once(const GenRequest& req) {
    req.validate();
    limiter_.acquire();

    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({json{{"role", "user"}, {"content", req.prompt}}});
    body["n"] = req.n;
    body["temperature"] = req.temperature;
    body["top_p"] = req.top_p;
    body["top_k"] = req.top_k;
    body["max_tokens"] = req.max_tokens;
    if (!req.stop.empty()) body["stop"] = req.stop;

    auto [base, path] = split_endpoint(config_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(10);
    client.set_read_timeout(120);
    httplib::Headers headers;
    if (!config_.key_env_var.empty()) {
        const char* key = std::getenv(config_.key_env_var.c_str());
        if (!key)
            throw ModelError(ModelError::Kind::invalid_request,
                             "environment variable " + config_.key_env_var + " is not set");
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res)
        throw ModelError(ModelError::Kind::transport,
                         "transport failure contacting " + config_.endpoint);
    if (res->status == 429 || res->status >= 500)
        throw ModelError(ModelError::Kind::transport,
                         "endpoint returned status " + std::to_string(res->status));
    if (res->status != 200)
        throw ModelError(ModelError::Kind::invalid_request,
                         "endpoint returned status " + std::to_string(res->status) + ": " + res->body);

    json parsed = json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices"))
        throw ModelError(ModelError::Kind::transport, "malformed completion response");
    std::vector<std::string> completions;
    for (const auto& choice : parsed["choices"]) {
        if (choice.contains("message"))
            completions.push_back(choice["message"].value("content", std::string()));
        else
            completions.push_back(choice.value("text", std::string()));
    }
    return completions;
}

}  // namespace dforge::llm
