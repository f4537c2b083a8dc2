#include "srag/metadata.hpp"

#include "srag/errors.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace srag {
namespace {

bool is_snake_case(std::string_view s) {
    if (s.empty())
        return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

bool contains_any(std::string_view s, std::string_view needle) {
    return s.find(needle) != std::string_view::npos;
}

void require(bool ok, const std::string& what) {
    if (!ok)
        throw InvalidArgument("metadata: " + what);
}

} // namespace

std::string_view to_string(Sentiment s) {
    switch (s) {
    case Sentiment::positive: return "positive";
    case Sentiment::negative: return "negative";
    case Sentiment::neutral: return "neutral";
    }
    return "neutral";
}

std::optional<Sentiment> sentiment_from_string(std::string_view s) {
    if (s == "positive")
        return Sentiment::positive;
    if (s == "negative")
        return Sentiment::negative;
    if (s == "neutral")
        return Sentiment::neutral;
    return std::nullopt;
}

std::string_view to_string(QueryClass c) {
    switch (c) {
    case QueryClass::predictive: return "predictive";
    case QueryClass::information_lookup: return "information_lookup";
    case QueryClass::analytical: return "analytical";
    case QueryClass::comparative: return "comparative";
    case QueryClass::informational: return "informational";
    case QueryClass::quantitative: return "quantitative";
    }
    return "informational";
}

std::string_view display_name(QueryClass c) {
    switch (c) {
    case QueryClass::predictive: return "Predictive";
    case QueryClass::information_lookup: return "Information Lookup";
    case QueryClass::analytical: return "Analytical";
    case QueryClass::comparative: return "Comparative";
    case QueryClass::informational: return "Informational";
    case QueryClass::quantitative: return "Quantitative";
    }
    return "Informational";
}

std::optional<QueryClass> query_class_from_string(std::string_view s) {
    for (QueryClass c : kAllQueryClasses) {
        if (s == to_string(c) || s == display_name(c))
            return c;
    }
    return std::nullopt;
}

bool TagMap::insert(std::string key, std::string value) {
    if (contains(key))
        return false;
    entries_.emplace_back(std::move(key), std::move(value));
    return true;
}

bool TagMap::contains(std::string_view key) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.first == key; });
}

std::vector<std::pair<std::string, AblationMask>> leave_one_out_masks() {
    std::vector<std::pair<std::string, AblationMask>> masks;
    AblationMask m = AblationMask::full();
    m.semantic_tags = false;
    masks.emplace_back("No Semantic Tags", m);
    m = AblationMask::full();
    m.topics = false;
    masks.emplace_back("No Topics", m);
    m = AblationMask::full();
    m.chunk_type = false;
    masks.emplace_back("No Chunk Type", m);
    m = AblationMask::full();
    m.kg_triples = false;
    masks.emplace_back("No KG Triples", m);
    m = AblationMask::full();
    m.sentiment = false;
    masks.emplace_back("No Sentiment", m);
    return masks;
}

bool PartialMetadata::empty() const {
    return !chunk_type && !sentiment && !topics && !triples && !tags;
}

AblationMask PartialMetadata::presence() const {
    AblationMask m = AblationMask::none();
    m.chunk_type = chunk_type.has_value();
    m.sentiment = sentiment.has_value();
    m.topics = topics.has_value();
    m.kg_triples = triples.has_value();
    m.semantic_tags = tags.has_value();
    return m;
}

PartialMetadata to_partial(const StructuredMetadata& m, const AblationMask& mask) {
    PartialMetadata p;
    if (mask.chunk_type)
        p.chunk_type = m.chunk_type;
    if (mask.sentiment)
        p.sentiment = m.sentiment;
    if (mask.topics)
        p.topics = m.topics;
    if (mask.kg_triples)
        p.triples = m.triples;
    if (mask.semantic_tags)
        p.tags = m.tags;
    return p;
}

void validate_metadata(const PartialMetadata& m) {
    if (m.chunk_type)
        require(is_snake_case(*m.chunk_type), "chunk type must match [a-z0-9_]+");
    if (m.topics) {
        for (const auto& t : *m.topics) {
            require(!t.empty(), "topic must be non-empty");
            require(!contains_any(t, ",") && !contains_any(t, "\n"),
                    "topic must not contain ',' or newline");
            require(t.front() != ' ' && t.back() != ' ',
                    "topic must not have leading or trailing spaces");
        }
        for (std::size_t i = 0; i < m.topics->size(); ++i)
            for (std::size_t j = i + 1; j < m.topics->size(); ++j)
                require((*m.topics)[i] != (*m.topics)[j], "duplicate topic");
    }
    if (m.triples) {
        for (const auto& t : *m.triples) {
            for (const std::string* f : {&t.subject, &t.relation, &t.object}) {
                require(!f->empty(), "triple field must be non-empty");
                require(!contains_any(*f, "->") && !contains_any(*f, ";") &&
                            !contains_any(*f, "\n"),
                        "triple field must not contain '->', ';' or newline");
            }
        }
    }
    if (m.tags) {
        for (const auto& [k, v] : m.tags->entries()) {
            require(!k.empty(), "tag key must be non-empty");
            for (const std::string* f : {&k, &v})
                require(!contains_any(*f, "'") && !contains_any(*f, "\n"),
                        "tag fields must not contain quotes or newlines");
        }
    }
}

std::string render_metadata_block(const PartialMetadata& m) {
    std::string out;
    out.append(kMetadataHeader);
    out.push_back('\n');

    if (m.chunk_type) {
        out.append("\nType: ");
        out.append(*m.chunk_type);
        out.push_back('\n');
    }
    if (m.sentiment) {
        out.append("\nSentiment: ");
        out.append(to_string(*m.sentiment));
        out.push_back('\n');
    }
    if (m.topics) {
        out.append("\nTopics: ");
        for (std::size_t i = 0; i < m.topics->size(); ++i) {
            if (i > 0)
                out.append(", ");
            out.append((*m.topics)[i]);
        }
        out.push_back('\n');
    }
    if (m.triples) {
        out.append("\nKG Triples:\n");
        for (std::size_t i = 0; i < m.triples->size(); ++i) {
            const KGTriple& t = (*m.triples)[i];
            out.append(t.subject);
            out.append(" -> ");
            out.append(t.relation);
            out.append(" -> ");
            out.append(t.object);
            if (i + 1 < m.triples->size())
                out.push_back(';');
            out.push_back('\n');
        }
    }
    if (m.tags) {
        out.append("\nTags:\n{");
        const auto& entries = m.tags->entries();
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (i > 0)
                out.append(",\n");
            out.push_back('\'');
            out.append(entries[i].first);
            out.append("': '");
            out.append(entries[i].second);
            out.push_back('\'');
        }
        out.append("}\n");
    }
    return out;
}

std::string render_metadata_block(const StructuredMetadata& m, const AblationMask& mask) {
    return render_metadata_block(to_partial(m, mask));
}

namespace {

// Cursor over the block text tracking the absolute offset for errors.
struct Cursor {
    std::string_view text;
    std::size_t pos = 0;

    bool at_end() const { return pos >= text.size(); }
    std::string_view rest() const { return text.substr(pos); }

    bool consume(std::string_view prefix) {
        if (rest().substr(0, prefix.size()) == prefix) {
            pos += prefix.size();
            return true;
        }
        return false;
    }

    // Reads up to (not including) the next '\n' and consumes the newline.
    // A block line without a trailing newline is only legal at end of input.
    std::string_view take_line() {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line;
        if (nl == std::string_view::npos) {
            line = text.substr(pos);
            pos = text.size();
        } else {
            line = text.substr(pos, nl - pos);
            pos = nl + 1;
        }
        return line;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos); }
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ')
        s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ')
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> parse_topics_line(Cursor& c, std::string_view line) {
    std::vector<std::string> topics;
    std::size_t start = 0;
    while (start <= line.size()) {
        std::size_t comma = line.find(',', start);
        std::string_view piece =
            comma == std::string_view::npos ? line.substr(start) : line.substr(start, comma - start);
        std::string_view t = trim(piece);
        if (t.empty())
            c.fail("empty topic");
        std::string topic(t);
        if (std::find(topics.begin(), topics.end(), topic) != topics.end())
            c.fail("duplicate topic");
        topics.push_back(std::move(topic));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return topics;
}

KGTriple parse_triple_line(Cursor& c, std::string_view line) {
    const std::size_t first = line.find(" -> ");
    if (first == std::string_view::npos)
        c.fail("triple line must contain two ' -> ' delimiters");
    const std::size_t second = line.find(" -> ", first + 4);
    if (second == std::string_view::npos)
        c.fail("triple line must contain two ' -> ' delimiters");
    KGTriple t{std::string(line.substr(0, first)),
               std::string(line.substr(first + 4, second - first - 4)),
               std::string(line.substr(second + 4))};
    if (t.subject.empty() || t.relation.empty() || t.object.empty())
        c.fail("triple fields must be non-empty");
    for (const std::string* f : {&t.subject, &t.relation, &t.object})
        if (f->find("->") != std::string::npos)
            c.fail("triple fields must not contain the arrow delimiter");
    return t;
}

std::pair<std::string, std::string> parse_tag_pair(Cursor& c, std::string_view piece) {
    // '<key>': '<value>'
    if (piece.size() < 6 || piece.front() != '\'')
        c.fail("tag entry must start with a quoted key");
    const std::size_t key_end = piece.find("': '", 1);
    if (key_end == std::string_view::npos)
        c.fail("tag entry must separate key and value with \"': '\"");
    if (piece.back() != '\'')
        c.fail("tag entry must end with a quoted value");
    std::string key(piece.substr(1, key_end - 1));
    std::string value(piece.substr(key_end + 4, piece.size() - key_end - 5));
    if (key.empty())
        c.fail("tag key must be non-empty");
    if (key.find('\'') != std::string::npos || value.find('\'') != std::string::npos)
        c.fail("tag fields must not contain quotes");
    return {std::move(key), std::move(value)};
}

// True when the text at the cursor begins a known section header.
bool at_section(const Cursor& c) {
    const std::string_view r = c.rest();
    return r.starts_with("Type: ") || r.starts_with("Sentiment: ") ||
           r.starts_with("Topics: ") || r.starts_with("KG Triples:") || r.starts_with("Tags:");
}

} // namespace

MetadataParseResult parse_metadata_block(std::string_view text) {
    MetadataParseResult result;
    Cursor c{text};
    // The block starts only with the exact header line; a longer first line
    // that merely begins with the marker is ordinary text.
    if (!c.consume(kMetadataHeader) || (!c.at_end() && !c.consume("\n"))) {
        result.remainder = std::string(text);
        return result;
    }
    result.block_present = true;
    PartialMetadata& m = result.metadata;

    while (!c.at_end()) {
        const std::size_t before = c.pos;
        if (!c.consume("\n"))
            break; // no blank separator: block ends here
        if (!at_section(c)) {
            c.pos = before; // the blank line belongs to the remainder
            break;
        }
        if (c.consume("Type: ")) {
            if (m.chunk_type)
                c.fail("duplicate Type section");
            std::string_view line = c.take_line();
            if (!is_snake_case(line))
                c.fail("chunk type must match [a-z0-9_]+");
            m.chunk_type = std::string(line);
        } else if (c.consume("Sentiment: ")) {
            if (m.sentiment)
                c.fail("duplicate Sentiment section");
            std::string_view line = c.take_line();
            auto s = sentiment_from_string(line);
            if (!s)
                c.fail("sentiment must be positive, negative or neutral");
            m.sentiment = *s;
        } else if (c.consume("Topics: ")) {
            if (m.topics)
                c.fail("duplicate Topics section");
            m.topics = parse_topics_line(c, c.take_line());
        } else if (c.consume("KG Triples:")) {
            if (m.triples)
                c.fail("duplicate KG Triples section");
            if (!c.at_end() && !c.consume("\n"))
                c.fail("KG Triples header must end the line");
            m.triples.emplace();
            // Entries are ';'-terminated except the last; an immediately
            // following blank line (or end of text) means an empty section.
            while (!c.at_end() && !c.rest().starts_with("\n")) {
                std::string_view line = c.take_line();
                const bool more = line.ends_with(";");
                if (more)
                    line.remove_suffix(1);
                m.triples->push_back(parse_triple_line(c, line));
                if (!more)
                    break;
            }
        } else if (c.consume("Tags:")) {
            if (m.tags)
                c.fail("duplicate Tags section");
            if (!c.at_end() && !c.consume("\n"))
                c.fail("Tags header must end the line");
            m.tags.emplace();
            if (!c.consume("{"))
                c.fail("tags must open with '{'");
            if (c.consume("}")) {
                if (!c.at_end() && !c.consume("\n"))
                    c.fail("tags must end the line after '}'");
            } else {
                for (;;) {
                    std::string_view line = c.take_line();
                    const bool more = line.ends_with(",");
                    const bool closed = !more && line.ends_with("}");
                    if (!more && !closed)
                        c.fail("tag entry must end with ',' or '}'");
                    line.remove_suffix(1);
                    auto [key, value] = parse_tag_pair(c, line);
                    if (!m.tags->insert(std::move(key), std::move(value)))
                        c.fail("duplicate tag key");
                    if (closed)
                        break;
                }
            }
        }
    }

    result.remainder = std::string(c.rest());
    return result;
}

MetadataParseResult find_metadata_block(std::string_view text) {
    std::size_t pos = 0;
    while (pos != std::string_view::npos) {
        const std::size_t hit = text.find(kMetadataHeader, pos);
        if (hit == std::string_view::npos)
            break;
        if (hit == 0 || text[hit - 1] == '\n') {
            MetadataParseResult result = parse_metadata_block(text.substr(hit));
            if (result.block_present)
                return result;
        }
        pos = hit + 1;
    }
    MetadataParseResult result;
    result.remainder = std::string(text);
    return result;
}

} // namespace srag
