#include "srag/errors.hpp"
#include "srag/openai_client.hpp"
#include "srag/tagger.hpp"

#include <nlohmann/json.hpp>

namespace srag {
namespace {

using nlohmann::json;

constexpr const char* kChunkSystemPrompt =
    "You annotate text passages for a retrieval system. Reply with a single JSON object and "
    "nothing else, using exactly these fields:\n"
    "{\"chunk_type\": \"<lowercase_snake_case>\", \"sentiment\": "
    "\"positive|negative|neutral\", \"topics\": [\"<topic>\", ...], \"triples\": "
    "[{\"subject\": \"...\", \"relation\": \"...\", \"object\": \"...\"}, ...], \"tags\": "
    "[[\"<key>\", \"<value>\"], ...]}\n"
    "Rules: 1-5 topics, each a short capitalized phrase without commas; triples only for "
    "facts explicitly stated, fields must not contain '->' or ';'; tags are key-value pairs "
    "for named metrics and figures, without single quotes; sentiment reflects the overall "
    "tone of the passage.";

constexpr const char* kQuerySystemPrompt =
    "You annotate search queries for a retrieval system. Reply with a single JSON object and "
    "nothing else, using exactly these fields:\n"
    "{\"query_class\": "
    "\"predictive|information_lookup|analytical|comparative|informational|quantitative\", "
    "\"sentiment\": \"positive|negative|neutral\", \"topics\": [\"<topic>\", ...], "
    "\"triples\": [{\"subject\": \"...\", \"relation\": \"...\", \"object\": \"...\"}, ...], "
    "\"tags\": [[\"<key>\", \"<value>\"], ...]}\n"
    "Rules: 1-5 topics, each a short capitalized phrase without commas; triples and tags may "
    "be empty arrays; fields must not contain '->', ';' or single quotes.";

// Tolerates a fenced ```json ... ``` wrapper; anything else must be bare JSON.
std::string_view strip_code_fence(std::string_view s) {
    auto trim = [](std::string_view v) {
        while (!v.empty() && (v.front() == ' ' || v.front() == '\n' || v.front() == '\r' ||
                              v.front() == '\t'))
            v.remove_prefix(1);
        while (!v.empty() &&
               (v.back() == ' ' || v.back() == '\n' || v.back() == '\r' || v.back() == '\t'))
            v.remove_suffix(1);
        return v;
    };
    s = trim(s);
    if (s.starts_with("```")) {
        const std::size_t nl = s.find('\n');
        const std::size_t close = s.rfind("```");
        if (nl != std::string_view::npos && close != std::string_view::npos && close > nl)
            s = trim(s.substr(nl + 1, close - nl - 1));
    }
    return s;
}

StructuredMetadata parse_tagger_reply(const std::string& reply, TagRole role,
                                      QueryClass* cls_out) {
    json obj;
    try {
        obj = json::parse(strip_code_fence(reply));
    } catch (const json::exception& e) {
        throw ContentError(std::string("tagger reply is not valid JSON: ") + e.what());
    }

    StructuredMetadata m;
    try {
        if (role == TagRole::query) {
            const auto cls_str = obj.at("query_class").get<std::string>();
            const auto cls = query_class_from_string(cls_str);
            if (!cls)
                throw ContentError("tagger reply has unknown query_class '" + cls_str + "'");
            if (cls_out)
                *cls_out = *cls;
            m.chunk_type = std::string(to_string(*cls));
        } else {
            m.chunk_type = obj.at("chunk_type").get<std::string>();
        }

        const auto sentiment_str = obj.at("sentiment").get<std::string>();
        const auto sentiment = sentiment_from_string(sentiment_str);
        if (!sentiment)
            throw ContentError("tagger reply has unknown sentiment '" + sentiment_str + "'");
        m.sentiment = *sentiment;

        for (const json& t : obj.at("topics"))
            m.topics.push_back(t.get<std::string>());
        for (const json& t : obj.at("triples"))
            m.triples.push_back({t.at("subject").get<std::string>(),
                                 t.at("relation").get<std::string>(),
                                 t.at("object").get<std::string>()});
        for (const json& t : obj.at("tags")) {
            if (!t.is_array() || t.size() != 2)
                throw ContentError("tagger reply tag entries must be [key, value] pairs");
            if (!m.tags.insert(t.at(0).get<std::string>(), t.at(1).get<std::string>()))
                throw ContentError("tagger reply has a duplicate tag key");
        }
    } catch (const json::exception& e) {
        throw ContentError(std::string("tagger reply violates schema: ") + e.what());
    }

    if (m.topics.empty())
        throw ContentError("tagger reply has no topics");
    try {
        validate_metadata(to_partial(m, AblationMask::full()));
    } catch (const InvalidArgument& e) {
        throw ContentError(std::string("tagger reply violates metadata constraints: ") +
                           e.what());
    }
    return m;
}

} // namespace

LlmTagger::LlmTagger(OpenAiClient& client, std::string model, int max_schema_retries)
    : client_(client), model_(std::move(model)), max_schema_retries_(max_schema_retries) {}

StructuredMetadata LlmTagger::tag_impl(const std::string& text, TagRole role,
                                       QueryClass* cls_out) {
    const char* system = role == TagRole::query ? kQuerySystemPrompt : kChunkSystemPrompt;
    std::string last_error;
    for (int attempt = 0; attempt <= max_schema_retries_; ++attempt) {
        const std::string reply = client_.chat(model_, {{"system", system}, {"user", text}}, 0.0);
        try {
            return parse_tagger_reply(reply, role, cls_out);
        } catch (const ContentError& e) {
            last_error = e.what();
        }
    }
    throw ContentError("tagger reply invalid after " + std::to_string(max_schema_retries_) +
                       " retries: " + last_error);
}

StructuredMetadata LlmTagger::tag(const std::string& text, TagRole role) {
    return tag_impl(text, role, nullptr);
}

QueryClass LlmTagger::classify(const std::string& query) {
    QueryClass cls = QueryClass::informational;
    tag_impl(query, TagRole::query, &cls);
    return cls;
}

std::string LlmTagger::name() const {
    return "remote:" + model_;
}

} // namespace srag
