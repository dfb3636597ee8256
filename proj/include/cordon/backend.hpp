#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cordon {

/// Which agent (or evaluation judge) a chat call acts as. The scripted
/// backend keys its rule table on this; the HTTP backend uses it to pick a
/// per-role model name.
enum class Role {
    extractor,
    auditor,
    gate,
    synthesizer,
    judge,
    correctness,
    vanilla,
    cot_detect,
    danger_classify,
    internal_answer,
    draft,
};

std::string to_string(Role role);

/// Paper defaults: 0.0 everywhere except synthesis at 0.3.
double default_temperature(Role role);

struct ChatRequest {
    Role role = Role::extractor;
    std::string system_prompt;  // may be empty; templates are self-contained
    std::string user_content;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;
};

struct EmbeddingVector {
    std::vector<double> values;
    std::size_t dimension() const { return values.size(); }
};

/// Standard cosine; throws InputError on dimension mismatch or zero norm.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string chat_complete(const ChatRequest& request) = 0;
    virtual EmbeddingVector embed_text(const std::string& text) = 0;
};

/// Deterministic offline model: a pure function of (role, input, seed).
/// Embeddings are L2-normalized token-count vectors over a 4096-bucket
/// hashed vocabulary (whitespace-tokenized, case-folded).
class ScriptedBackend : public Backend {
public:
    static constexpr std::size_t kEmbeddingDim = 4096;

    std::string chat_complete(const ChatRequest& request) override;
    EmbeddingVector embed_text(const std::string& text) override;
};

struct HttpBackendConfig {
    std::string base_url;          // e.g. https://api.example.com/v1
    std::string api_key;           // resolved from environment by the caller
    std::string model;             // default model name
    std::map<std::string, std::string> models_by_role;  // role name -> model
    std::string embedding_model;
    int max_retries = 3;           // attempts, backoff 1s/2s/4s
    int backoff_base_ms = 1000;
    int timeout_seconds = 60;
    int max_inflight = 8;
};

/// Chat-completions-compatible wire client (request: model, messages[],
/// temperature, seed; response: first choice's message content).
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    ~HttpBackend() override;

    std::string chat_complete(const ChatRequest& request) override;
    EmbeddingVector embed_text(const std::string& text) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Per-query accounting wrapper; forwards to a shared backend.
class CountingBackend : public Backend {
public:
    explicit CountingBackend(Backend& inner) : inner_(inner) {}

    std::string chat_complete(const ChatRequest& request) override {
        ++chat_calls_;
        return inner_.chat_complete(request);
    }
    EmbeddingVector embed_text(const std::string& text) override {
        ++embed_calls_;
        return inner_.embed_text(text);
    }

    int chat_calls() const { return chat_calls_.load(); }
    int embed_calls() const { return embed_calls_.load(); }

private:
    Backend& inner_;
    std::atomic<int> chat_calls_{0};
    std::atomic<int> embed_calls_{0};
};

}  // namespace cordon
