#pragma once

#include "srag/chat.hpp"
#include "srag/embedding.hpp"

#include <memory>
#include <string>
#include <vector>

namespace srag {

struct ApiConfig {
    std::string base_url;       // e.g. http://127.0.0.1:8089 or https://api.openai.com
    std::string api_key;        // resolved from the environment by the caller
    int timeout_seconds = 60;
    int max_retries = 3;        // transport retries (connect errors, 429, 5xx)
    int initial_backoff_ms = 200;
    int max_in_flight = 4;      // global budget across chat/embeddings calls
    int min_request_interval_ms = 0;
};

struct ChatMessage {
    std::string role;
    std::string content;
};

/// Thin client for OpenAI-compatible /v1/chat/completions and /v1/embeddings
/// endpoints. Transport failures retry with exponential backoff up to the
/// configured cap, then surface as TransportError; schema violations in
/// response bodies surface as ContentError. One instance carries the global
/// in-flight budget shared by all callers.
class OpenAiClient {
public:
    explicit OpenAiClient(ApiConfig config);
    ~OpenAiClient();

    OpenAiClient(const OpenAiClient&) = delete;
    OpenAiClient& operator=(const OpenAiClient&) = delete;

    /// Returns the first choice's message content.
    std::string chat(const std::string& model, const std::vector<ChatMessage>& messages,
                     double temperature);

    /// One request per call; order-preserving via the response index field.
    std::vector<EmbeddingVector> embed(const std::string& model,
                                       const std::vector<std::string>& texts);

    const ApiConfig& config() const { return config_; }

private:
    struct Impl;
    std::string post_json(const std::string& path, const std::string& body);

    ApiConfig config_;
    std::unique_ptr<Impl> impl_;
};

/// EmbeddingProvider over a remote endpoint; batches inputs up to batch_size.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    RemoteEmbedder(OpenAiClient& client, std::string model, std::size_t batch_size = 64);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string name() const override;

private:
    OpenAiClient& client_;
    std::string model_;
    std::size_t batch_size_;
};

/// ChatClient over a remote endpoint, temperature pinned to 0.
class OpenAiChatClient final : public ChatClient {
public:
    OpenAiChatClient(OpenAiClient& client, std::string model);

    std::string complete(const std::string& system_prompt,
                         const std::string& user_prompt) override;
    std::string name() const override;

private:
    OpenAiClient& client_;
    std::string model_;
};

} // namespace srag
