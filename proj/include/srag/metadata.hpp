#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace srag {

enum class Sentiment { positive, negative, neutral };

std::string_view to_string(Sentiment s);
std::optional<Sentiment> sentiment_from_string(std::string_view s);

/// The six query classes reported by the evaluation tables.
enum class QueryClass {
    predictive,
    information_lookup,
    analytical,
    comparative,
    informational,
    quantitative,
};

inline constexpr std::array<QueryClass, 6> kAllQueryClasses = {
    QueryClass::predictive,   QueryClass::information_lookup, QueryClass::analytical,
    QueryClass::comparative,  QueryClass::informational,      QueryClass::quantitative,
};

/// snake_case form, used inside metadata blocks ("information_lookup").
std::string_view to_string(QueryClass c);
/// Display form, used in report tables ("Information Lookup").
std::string_view display_name(QueryClass c);
std::optional<QueryClass> query_class_from_string(std::string_view s);

/// (subject, relation, object) fact. Fields must be non-empty and free of the
/// "->" and ";" serialization delimiters.
struct KGTriple {
    std::string subject;
    std::string relation;
    std::string object;

    bool operator==(const KGTriple&) const = default;
};

/// Ordered key-value tags; keys unique, insertion order preserved (the block
/// serialization is order-sensitive).
class TagMap {
public:
    using Entry = std::pair<std::string, std::string>;

    /// Returns false (and leaves the map unchanged) when the key is present.
    bool insert(std::string key, std::string value);
    bool contains(std::string_view key) const;

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    bool operator==(const TagMap&) const = default;

private:
    std::vector<Entry> entries_;
};

/// Full tag set for one chunk or query. Ablation removes components at render
/// time; the value itself always carries all five.
struct StructuredMetadata {
    std::string chunk_type;            // lowercase snake_case, e.g. financial_table
    Sentiment sentiment = Sentiment::neutral;
    std::vector<std::string> topics;   // ordered, no duplicates, no commas
    std::vector<KGTriple> triples;
    TagMap tags;

    bool operator==(const StructuredMetadata&) const = default;
};

/// Which of the five metadata components are rendered. Field order mirrors the
/// ablation report rows.
struct AblationMask {
    bool semantic_tags = true;
    bool topics = true;
    bool chunk_type = true;
    bool kg_triples = true;
    bool sentiment = true;

    static constexpr AblationMask full() { return {}; }
    static constexpr AblationMask none() { return {false, false, false, false, false}; }

    bool any() const { return semantic_tags || topics || chunk_type || kg_triples || sentiment; }

    bool operator==(const AblationMask&) const = default;
};

/// The five leave-one-out masks, in report row order, with their labels.
std::vector<std::pair<std::string, AblationMask>> leave_one_out_masks();

/// Metadata with possibly-absent components, as produced by parsing a block
/// rendered under a non-full mask.
struct PartialMetadata {
    std::optional<std::string> chunk_type;
    std::optional<Sentiment> sentiment;
    std::optional<std::vector<std::string>> topics;
    std::optional<std::vector<KGTriple>> triples;
    std::optional<TagMap> tags;

    bool empty() const;
    /// Mask with a true bit for every present component.
    AblationMask presence() const;

    bool operator==(const PartialMetadata&) const = default;
};

PartialMetadata to_partial(const StructuredMetadata& m, const AblationMask& mask);

inline constexpr std::string_view kMetadataHeader = "--- METADATA ---";

/// Validates the grammar-level character constraints (delimiter-free triples,
/// quote-free tags, comma-free topics, snake_case type). Throws
/// InvalidArgument naming the first violation.
void validate_metadata(const PartialMetadata& m);

/// Renders the textual metadata block: header line, then one section per
/// present component (Type, Sentiment, Topics, KG Triples, Tags) with a blank
/// line before each section. Components masked off contribute no bytes.
std::string render_metadata_block(const StructuredMetadata& m, const AblationMask& mask);
std::string render_metadata_block(const PartialMetadata& m);

struct MetadataParseResult {
    PartialMetadata metadata;
    std::string remainder;
    bool block_present = false;
};

/// Parses a metadata block at the start of `text`. When no header is present
/// returns (empty, text). A header followed by a section that violates the
/// grammar throws ParseError with the character offset.
MetadataParseResult parse_metadata_block(std::string_view text);

/// Locates a metadata block anywhere in `text` (header at a line start) and
/// parses it. Used to recover metadata from indexed chunk text, where the
/// block follows the chunk body. Returns an empty result when absent.
MetadataParseResult find_metadata_block(std::string_view text);

} // namespace srag
