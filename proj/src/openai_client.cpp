#include "srag/openai_client.hpp"

#include "srag/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <mutex>
#include <semaphore>
#include <thread>

namespace srag {
namespace {

using nlohmann::json;

bool retryable_status(int status) {
    return status == 429 || status >= 500;
}

} // namespace

struct OpenAiClient::Impl {
    explicit Impl(const ApiConfig& config) : in_flight(std::max(1, config.max_in_flight)) {}

    void wait_for_slot(int min_interval_ms) {
        if (min_interval_ms <= 0)
            return;
        std::unique_lock lock(rate_mutex);
        const auto now = std::chrono::steady_clock::now();
        const auto earliest = last_request + std::chrono::milliseconds(min_interval_ms);
        if (now < earliest) {
            lock.unlock();
            std::this_thread::sleep_until(earliest);
            lock.lock();
        }
        last_request = std::chrono::steady_clock::now();
    }

    std::counting_semaphore<256> in_flight;
    std::mutex rate_mutex;
    std::chrono::steady_clock::time_point last_request{};
};

OpenAiClient::OpenAiClient(ApiConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_)) {
    if (config_.base_url.empty())
        throw InvalidArgument("OpenAiClient: base_url must be set");
}

OpenAiClient::~OpenAiClient() = default;

std::string OpenAiClient::post_json(const std::string& path, const std::string& body) {
    impl_->in_flight.acquire();
    struct Release {
        std::counting_semaphore<256>& sem;
        ~Release() { sem.release(); }
    } release{impl_->in_flight};

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            const int backoff = config_.initial_backoff_ms * (1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }
        impl_->wait_for_slot(config_.min_request_interval_ms);
        // One connection per request keeps concurrent callers independent.
        httplib::Client http(config_.base_url);
        http.set_connection_timeout(config_.timeout_seconds, 0);
        http.set_read_timeout(config_.timeout_seconds, 0);
        http.set_write_timeout(config_.timeout_seconds, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty())
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        httplib::Result res = http.Post(path, headers, body, "application/json");
        if (!res) {
            last_error = "connection error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200)
            return res->body;
        last_error = "HTTP " + std::to_string(res->status) + " from " + path;
        if (!retryable_status(res->status))
            throw TransportError(last_error + ": " + res->body.substr(0, 200));
    }
    throw TransportError(last_error + " (after " + std::to_string(config_.max_retries) +
                         " retries)");
}

std::string OpenAiClient::chat(const std::string& model,
                               const std::vector<ChatMessage>& messages, double temperature) {
    json body;
    body["model"] = model;
    body["temperature"] = temperature;
    body["messages"] = json::array();
    for (const auto& m : messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    const std::string raw = post_json("/v1/chat/completions", body.dump());
    try {
        const json response = json::parse(raw);
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ContentError(std::string("chat response violates schema: ") + e.what());
    }
}

std::vector<EmbeddingVector> OpenAiClient::embed(const std::string& model,
                                                 const std::vector<std::string>& texts) {
    json body;
    body["model"] = model;
    body["input"] = texts;

    const std::string raw = post_json("/v1/embeddings", body.dump());
    try {
        const json response = json::parse(raw);
        const json& data = response.at("data");
        if (!data.is_array() || data.size() != texts.size())
            throw ContentError("embeddings response has " + std::to_string(data.size()) +
                               " items for " + std::to_string(texts.size()) + " inputs");
        std::vector<EmbeddingVector> out(texts.size());
        std::vector<bool> filled(texts.size(), false);
        for (const json& item : data) {
            const auto idx = item.at("index").get<std::size_t>();
            if (idx >= out.size() || filled[idx])
                throw ContentError("embeddings response has invalid index field");
            const json& values = item.at("embedding");
            EmbeddingVector v(static_cast<Eigen::Index>(values.size()));
            Eigen::Index i = 0;
            for (const json& x : values)
                v[i++] = x.get<double>();
            out[idx] = std::move(v);
            filled[idx] = true;
        }
        return out;
    } catch (const json::exception& e) {
        throw ContentError(std::string("embeddings response violates schema: ") + e.what());
    }
}

RemoteEmbedder::RemoteEmbedder(OpenAiClient& client, std::string model, std::size_t batch_size)
    : client_(client), model_(std::move(model)), batch_size_(std::max<std::size_t>(1, batch_size)) {}

std::vector<EmbeddingVector> RemoteEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
        const std::size_t end = std::min(texts.size(), start + batch_size_);
        std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(start),
                                       texts.begin() + static_cast<std::ptrdiff_t>(end));
        auto vectors = client_.embed(model_, batch);
        std::move(vectors.begin(), vectors.end(), std::back_inserter(out));
    }
    return out;
}

std::string RemoteEmbedder::name() const {
    return "remote:" + model_;
}

OpenAiChatClient::OpenAiChatClient(OpenAiClient& client, std::string model)
    : client_(client), model_(std::move(model)) {}

std::string OpenAiChatClient::complete(const std::string& system_prompt,
                                       const std::string& user_prompt) {
    return client_.chat(model_, {{"system", system_prompt}, {"user", user_prompt}}, 0.0);
}

std::string OpenAiChatClient::name() const {
    return "remote:" + model_;
}

} // namespace srag
