#pragma once

#include "srag/metadata.hpp"

#include <filesystem>
#include <regex>
#include <string>
#include <vector>

namespace srag {

enum class TagRole { chunk, query };

/// Produces structured metadata for chunks and queries. Implementations must
/// be usable from multiple workers concurrently.
class Tagger {
public:
    virtual ~Tagger() = default;

    /// All five components populated (triple/tag lists may be empty). For
    /// role=query the chunk_type field carries the query class string.
    virtual StructuredMetadata tag(const std::string& text, TagRole role) = 0;

    virtual QueryClass classify(const std::string& query) = 0;

    /// Provenance string recorded in run manifests.
    virtual std::string name() const = 0;
};

StructuredMetadata tag_text(const std::string& text, TagRole role, Tagger& tagger);
QueryClass classify_query(const std::string& query, Tagger& tagger);

/// One canonical topic with the lowercase surface patterns that signal it.
struct TopicRule {
    std::string canonical;
    std::vector<std::string> patterns;
};

struct RuleTaggerConfig {
    std::vector<TopicRule> topics;
    std::vector<std::string> entities; // known subjects for triple extraction
    std::vector<std::string> positive_words = {"growth", "raised", "resilient", "strong"};
    std::vector<std::string> negative_words = {"declined", "risk", "loss", "weak"};
    std::size_t max_topics = 5;
    std::size_t max_triples = 8;
    std::size_t max_tags = 16;

    /// General finance vocabulary used when no lexicon file is configured.
    static RuleTaggerConfig defaults();
};

/// Lexicon file: one rule per line, `Canonical | pattern | pattern ...`.
/// Lines starting with '#' and blank lines are ignored.
std::vector<TopicRule> load_topic_lexicon(const std::filesystem::path& path);
/// Entities file: one entity per line.
std::vector<std::string> load_entity_list(const std::filesystem::path& path);

/// Deterministic offline tagger. Query class by first-match precedence over
/// fixed patterns; chunk type by numeric-token density; sentiment by lexicon
/// counts; topics by lexicon frequency (capitalized-phrase fallback); triples
/// from sentences led by a known entity; tags from `key: value` and
/// `<metric> of <amount>` patterns. Equal input yields equal output across
/// runs and platforms.
class RuleTagger final : public Tagger {
public:
    explicit RuleTagger(RuleTaggerConfig config = RuleTaggerConfig::defaults());

    StructuredMetadata tag(const std::string& text, TagRole role) override;
    QueryClass classify(const std::string& query) override;
    std::string name() const override { return "rule"; }

    const RuleTaggerConfig& config() const { return config_; }

private:
    std::string chunk_type_of(const std::string& text) const;
    Sentiment sentiment_of(const std::string& text) const;
    std::vector<std::string> topics_of(const std::string& text) const;
    std::vector<KGTriple> triples_of(const std::string& text) const;
    TagMap tags_of(const std::string& text) const;

    RuleTaggerConfig config_;
    std::vector<std::pair<QueryClass, std::regex>> class_rules_;
};

class OpenAiClient;

/// Remote tagger: one chat request per text with a strict JSON response
/// schema, temperature 0, up to `max_schema_retries` retries when the reply
/// violates the schema.
class LlmTagger final : public Tagger {
public:
    LlmTagger(OpenAiClient& client, std::string model, int max_schema_retries = 2);

    StructuredMetadata tag(const std::string& text, TagRole role) override;
    QueryClass classify(const std::string& query) override;
    std::string name() const override;

private:
    StructuredMetadata tag_impl(const std::string& text, TagRole role, QueryClass* cls_out);

    OpenAiClient& client_;
    std::string model_;
    int max_schema_retries_;
};

} // namespace srag
