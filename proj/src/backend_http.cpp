#include <httplib.h>

#include <chrono>
#include <semaphore>
#include <thread>

#include <json.hpp>

#include "cordon/backend.hpp"
#include "cordon/errors.hpp"

namespace cordon {

namespace {

struct SplitUrl {
    std::string scheme_host_port;  // what httplib::Client wants
    std::string path_prefix;       // e.g. "/v1"
};

SplitUrl split_base_url(const std::string& base_url) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("backend base_url missing scheme: " + base_url);
    }
    auto path_start = base_url.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.scheme_host_port = base_url;
    } else {
        out.scheme_host_port = base_url.substr(0, path_start);
        out.path_prefix = base_url.substr(path_start);
        while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
            out.path_prefix.pop_back();
        }
    }
    return out;
}

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

}  // namespace

struct HttpBackend::Impl {
    HttpBackendConfig config;
    SplitUrl url;
    std::counting_semaphore<256> inflight;

    explicit Impl(HttpBackendConfig cfg)
        : config(std::move(cfg)),
          url(split_base_url(config.base_url)),
          inflight(std::max(1, config.max_inflight)) {}

    std::string model_for(Role role) const {
        auto it = config.models_by_role.find(to_string(role));
        if (it != config.models_by_role.end()) return it->second;
        return config.model;
    }

    // POSTs with retry on transport errors, 429, and 5xx (3 attempts,
    // backoff 1s/2s/4s). Returns the response body on 2xx.
    std::string post_json(const std::string& path, const nlohmann::json& body) {
        inflight.acquire();
        struct Release {
            std::counting_semaphore<256>& sem;
            ~Release() { sem.release(); }
        } release{inflight};

        const std::string payload = body.dump();
        int last_status = 0;
        std::string last_error = "transport error";
        for (int attempt = 0; attempt < std::max(1, config.max_retries); ++attempt) {
            if (attempt > 0) {
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(config.backoff_base_ms << (attempt - 1)));
            }
            httplib::Client client(url.scheme_host_port);
            client.set_connection_timeout(config.timeout_seconds, 0);
            client.set_read_timeout(config.timeout_seconds, 0);
            httplib::Headers headers;
            if (!config.api_key.empty()) {
                headers.emplace("Authorization", "Bearer " + config.api_key);
            }
            auto res = client.Post(url.path_prefix + path, headers, payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status >= 200 && res->status < 300) {
                return res->body;
            }
            last_status = res->status;
            if (!retryable_status(res->status)) {
                throw ProtocolError(res->status,
                                    "backend returned status " + std::to_string(res->status));
            }
        }
        if (last_status != 0) {
            throw ProtocolError(last_status, "backend returned status " +
                                                 std::to_string(last_status) + " after retries");
        }
        throw BackendError("backend unreachable after retries: " + last_error);
    }
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::chat_complete(const ChatRequest& request) {
    if (request.user_content.empty()) {
        throw InputError("chat_complete: empty user_content");
    }
    nlohmann::json body;
    body["model"] = impl_->model_for(request.role);
    body["messages"] = nlohmann::json::array();
    if (!request.system_prompt.empty()) {
        body["messages"].push_back({{"role", "system"}, {"content", request.system_prompt}});
    }
    body["messages"].push_back({{"role", "user"}, {"content", request.user_content}});
    body["temperature"] = request.temperature;
    if (request.seed) body["seed"] = *request.seed;

    const std::string raw = impl_->post_json("/chat/completions", body);
    try {
        auto parsed = nlohmann::json::parse(raw);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(0, std::string("malformed chat response: ") + e.what());
    }
}

EmbeddingVector HttpBackend::embed_text(const std::string& text) {
    if (text.empty()) {
        throw InputError("embed_text: empty text");
    }
    nlohmann::json body;
    body["model"] = impl_->config.embedding_model.empty() ? impl_->config.model
                                                          : impl_->config.embedding_model;
    body["input"] = text;
    const std::string raw = impl_->post_json("/embeddings", body);
    try {
        auto parsed = nlohmann::json::parse(raw);
        EmbeddingVector v;
        for (const auto& x : parsed.at("data").at(0).at("embedding")) {
            v.values.push_back(x.get<double>());
        }
        if (v.values.empty()) {
            throw ProtocolError(0, "empty embedding in response");
        }
        return v;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(0, std::string("malformed embedding response: ") + e.what());
    }
}

}  // namespace cordon
