#include "srag/tagger.hpp"

#include "srag/errors.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace srag {
namespace {

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_upper(unsigned char c) {
    return c >= 'A' && c <= 'Z';
}

char ascii_lower(unsigned char c) {
    return is_ascii_upper(c) ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

std::string ascii_lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = ascii_lower(static_cast<unsigned char>(c));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

struct Token {
    std::string text;
    bool capitalized = false;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.empty())
            return;
        tokens.push_back({cur, is_ascii_upper(static_cast<unsigned char>(cur.front()))});
        cur.clear();
    };
    for (unsigned char c : text) {
        if (is_ascii_alnum(c))
            cur.push_back(static_cast<char>(c));
        else
            flush();
    }
    flush();
    return tokens;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
    if (needle.empty())
        return 0;
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = haystack.find(needle, pos)) != std::string_view::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

bool token_in(const std::vector<std::string>& words, const std::string& token) {
    return std::find(words.begin(), words.end(), token) != words.end();
}

std::string strip_forbidden(std::string_view s, std::string_view forbidden_chars) {
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (forbidden_chars.find(c) == std::string_view::npos)
            out.push_back(c);
    return out;
}

std::string sanitize_triple_field(std::string_view s) {
    std::string out(trim(s));
    std::size_t pos;
    while ((pos = out.find("->")) != std::string::npos)
        out.replace(pos, 2, "-");
    while ((pos = out.find(';')) != std::string::npos)
        out.erase(pos, 1);
    while ((pos = out.find('\n')) != std::string::npos)
        out[pos] = ' ';
    return std::string(trim(out));
}

} // namespace

StructuredMetadata tag_text(const std::string& text, TagRole role, Tagger& tagger) {
    if (text.empty())
        throw InvalidArgument("tag_text: text must be non-empty");
    StructuredMetadata m = tagger.tag(text, role);
    validate_metadata(to_partial(m, AblationMask::full()));
    if (m.topics.empty())
        throw ContentError("tag_text: tagger produced no topics");
    return m;
}

QueryClass classify_query(const std::string& query, Tagger& tagger) {
    if (query.empty())
        throw InvalidArgument("classify_query: query must be non-empty");
    return tagger.classify(query);
}

RuleTaggerConfig RuleTaggerConfig::defaults() {
    RuleTaggerConfig c;
    c.topics = {
        {"Revenue Growth", {"revenue growth", "sales growth", "top-line growth"}},
        {"Revenue", {"revenue", "sales"}},
        {"Earnings", {"earnings", "eps", "net income", "net profit"}},
        {"Margin", {"margin"}},
        {"Cash Flow", {"cash flow", "free cash flow"}},
        {"Valuation", {"valuation", "p/e", "multiple", "fair value"}},
        {"Guidance", {"guidance", "outlook"}},
        {"Market Performance", {"market cap", "share price", "stock"}},
        {"Capital Allocation", {"buyback", "dividend", "capital allocation"}},
        {"Risk", {"risk", "headwind"}},
        {"Growth", {"growth"}},
        {"Liquidity", {"liquidity", "working capital"}},
    };
    c.entities = {"Apple", "Microsoft", "Google", "Amazon", "Meta", "Nvidia"};
    return c;
}

std::vector<TopicRule> load_topic_lexicon(const std::filesystem::path& path) {
    const std::string content = [&] {
        std::ifstream in(path);
        if (!in)
            throw IoError("cannot open lexicon file: " + path.string());
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }();

    std::vector<TopicRule> rules;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t nl = content.find('\n', start);
        std::string_view line(content.data() + start,
                              (nl == std::string::npos ? content.size() : nl) - start);
        start = nl == std::string::npos ? content.size() + 1 : nl + 1;
        line = trim(line);
        if (line.empty() || line.front() == '#')
            continue;
        TopicRule rule;
        std::size_t field = 0;
        std::size_t piece_start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == '|') {
                std::string_view piece = trim(line.substr(piece_start, i - piece_start));
                if (field == 0) {
                    rule.canonical = std::string(piece);
                } else if (!piece.empty()) {
                    rule.patterns.push_back(ascii_lowercase(piece));
                }
                piece_start = i + 1;
                ++field;
            }
        }
        if (rule.canonical.empty())
            throw IoError("lexicon file: rule without canonical name in " + path.string());
        if (rule.patterns.empty())
            rule.patterns.push_back(ascii_lowercase(rule.canonical));
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::vector<std::string> load_entity_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open entities file: " + path.string());
    std::vector<std::string> entities;
    std::string line;
    while (std::getline(in, line)) {
        const std::string_view t = trim(line);
        if (!t.empty() && t.front() != '#')
            entities.emplace_back(t);
    }
    return entities;
}

RuleTagger::RuleTagger(RuleTaggerConfig config) : config_(std::move(config)) {
    for (const auto& rule : config_.topics) {
        if (rule.canonical.empty() || rule.canonical.find(',') != std::string::npos ||
            rule.canonical.find('\n') != std::string::npos)
            throw InvalidArgument("RuleTagger: invalid canonical topic '" + rule.canonical + "'");
    }
    const auto icase = std::regex::ECMAScript | std::regex::icase;
    class_rules_.emplace_back(QueryClass::comparative,
                              std::regex(R"(compare|versus|vs\.|peers)", icase));
    class_rules_.emplace_back(
        QueryClass::predictive,
        std::regex(R"(expected|forecast|projected|FY\d{4}E|\d{4}E)", icase));
    class_rules_.emplace_back(QueryClass::analytical,
                              std::regex(R"(why|how does|impact|affect|sensitivity)", icase));
    class_rules_.emplace_back(QueryClass::quantitative,
                              std::regex(R"(how much|how many|margin|ratio|%|\$)", icase));
    class_rules_.emplace_back(
        QueryClass::information_lookup,
        std::regex(R"(what is the .* (value|date|name)|who|when|where)", icase));
}

QueryClass RuleTagger::classify(const std::string& query) {
    for (const auto& [cls, re] : class_rules_) {
        if (std::regex_search(query, re))
            return cls;
    }
    return QueryClass::informational;
}

std::string RuleTagger::chunk_type_of(const std::string& text) const {
    const std::vector<Token> tokens = tokenize(text);
    if (tokens.empty())
        return "narrative";
    std::size_t numeric = 0;
    for (const Token& t : tokens) {
        if (std::any_of(t.text.begin(), t.text.end(),
                        [](unsigned char c) { return c >= '0' && c <= '9'; }))
            ++numeric;
    }
    // financial_table when at least 3 numeric tokens per 20 words.
    return numeric * 20 >= tokens.size() * 3 ? "financial_table" : "narrative";
}

Sentiment RuleTagger::sentiment_of(const std::string& text) const {
    std::size_t pos = 0;
    std::size_t neg = 0;
    for (const Token& t : tokenize(text)) {
        const std::string w = ascii_lowercase(t.text);
        if (token_in(config_.positive_words, w))
            ++pos;
        if (token_in(config_.negative_words, w))
            ++neg;
    }
    if (pos > neg)
        return Sentiment::positive;
    if (neg > pos)
        return Sentiment::negative;
    return Sentiment::neutral;
}

std::vector<std::string> RuleTagger::topics_of(const std::string& text) const {
    const std::string lower = ascii_lowercase(text);

    // Lexicon pass: frequency per canonical topic, config order breaking ties.
    std::vector<std::pair<std::string, std::size_t>> scored;
    for (const auto& rule : config_.topics) {
        std::size_t count = 0;
        for (const auto& pattern : rule.patterns)
            count += count_occurrences(lower, pattern);
        if (count == 0)
            continue;
        auto it = std::find_if(scored.begin(), scored.end(),
                               [&](const auto& p) { return p.first == rule.canonical; });
        if (it == scored.end())
            scored.emplace_back(rule.canonical, count);
        else
            it->second += count;
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    std::vector<std::string> topics;
    for (const auto& [canonical, count] : scored) {
        if (topics.size() >= config_.max_topics)
            break;
        topics.push_back(canonical);
    }
    if (!topics.empty())
        return topics;

    // Fallback: capitalized unigrams/bigrams by frequency.
    const std::vector<Token> tokens = tokenize(text);
    std::vector<std::pair<std::string, std::size_t>> phrases; // first-seen order
    auto bump = [&](const std::string& phrase) {
        auto it = std::find_if(phrases.begin(), phrases.end(),
                               [&](const auto& p) { return p.first == phrase; });
        if (it == phrases.end())
            phrases.emplace_back(phrase, 1);
        else
            ++it->second;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].capitalized)
            continue;
        std::size_t run_end = i;
        while (run_end + 1 < tokens.size() && tokens[run_end + 1].capitalized)
            ++run_end;
        if (run_end == i)
            bump(tokens[i].text);
        else
            for (std::size_t j = i; j < run_end; ++j)
                bump(tokens[j].text + " " + tokens[j + 1].text);
        i = run_end;
    }
    std::stable_sort(phrases.begin(), phrases.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [phrase, count] : phrases) {
        if (topics.size() >= config_.max_topics)
            break;
        topics.push_back(phrase);
    }
    if (!topics.empty())
        return topics;

    if (!tokens.empty()) {
        std::string t = tokens.front().text;
        t.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(t.front())));
        return {t};
    }
    return {"General"};
}

std::vector<KGTriple> RuleTagger::triples_of(const std::string& text) const {
    std::vector<KGTriple> triples;

    // Entities sorted longest-first so multi-word names win the prefix match.
    std::vector<const std::string*> entities;
    entities.reserve(config_.entities.size());
    for (const auto& e : config_.entities)
        entities.push_back(&e);
    std::stable_sort(entities.begin(), entities.end(),
                     [](const auto* a, const auto* b) { return a->size() > b->size(); });

    std::size_t start = 0;
    while (start < text.size() && triples.size() < config_.max_triples) {
        std::size_t end = text.find_first_of(".!?;\n", start);
        if (end == std::string::npos)
            end = text.size();
        std::string_view sentence = trim(std::string_view(text).substr(start, end - start));
        start = end + 1;
        if (sentence.empty())
            continue;

        const std::string lower_sentence = ascii_lowercase(sentence);
        for (const std::string* entity : entities) {
            const std::string lower_entity = ascii_lowercase(*entity);
            if (!lower_sentence.starts_with(lower_entity))
                continue;
            // Entity must end at a word boundary.
            if (lower_sentence.size() > lower_entity.size() &&
                is_ascii_alnum(
                    static_cast<unsigned char>(lower_sentence[lower_entity.size()])))
                continue;

            std::string_view rest = trim(sentence.substr(entity->size()));
            // Skip a possessive apostrophe fragment ("Apple's ...").
            if (rest.starts_with("'s "))
                rest = trim(rest.substr(3));
            std::size_t word_end = 0;
            while (word_end < rest.size() &&
                   is_ascii_alnum(static_cast<unsigned char>(rest[word_end])))
                ++word_end;
            std::string relation = sanitize_triple_field(rest.substr(0, word_end));
            std::string object = sanitize_triple_field(rest.substr(word_end));
            if (!relation.empty() && !object.empty() && object.size() <= 160)
                triples.push_back({*entity, ascii_lowercase(relation), std::move(object)});
            break;
        }
    }
    return triples;
}

TagMap RuleTagger::tags_of(const std::string& text) const {
    TagMap tags;

    // Line-level `key: value` pairs.
    std::size_t start = 0;
    while (start <= text.size() && tags.size() < config_.max_tags) {
        std::size_t nl = text.find('\n', start);
        std::string_view line(text.data() + start,
                              (nl == std::string::npos ? text.size() : nl) - start);
        start = nl == std::string::npos ? text.size() + 1 : nl + 1;
        line = trim(line);
        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon > 48)
            continue;
        std::string_view key_raw = trim(line.substr(0, colon));
        std::string_view value_raw = trim(line.substr(colon + 1));
        if (key_raw.empty() || value_raw.empty() || value_raw.size() > 80)
            continue;
        if (key_raw.find(':') != std::string_view::npos)
            continue;
        const bool key_has_letter = std::any_of(key_raw.begin(), key_raw.end(), [](char c) {
            return is_ascii_alnum(static_cast<unsigned char>(c));
        });
        if (!key_has_letter)
            continue;
        tags.insert(strip_forbidden(key_raw, "'\n"), strip_forbidden(value_raw, "'\n"));
    }

    // `<metric> of <amount>` patterns, e.g. "net income of $97 bn".
    static const std::regex metric_re(
        R"(([A-Za-z][A-Za-z ]{0,40}) of (\$?\d[\d,\.]*( ?(bn|mn|billion|million|percent|%))?))");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), metric_re);
         it != std::sregex_iterator() && tags.size() < config_.max_tags; ++it) {
        std::string key = (*it)[1].str();
        // Keep at most the last three words of the metric phrase.
        const std::vector<Token> words = tokenize(key);
        if (words.empty())
            continue;
        std::string short_key;
        const std::size_t first = words.size() > 3 ? words.size() - 3 : 0;
        for (std::size_t i = first; i < words.size(); ++i) {
            if (!short_key.empty())
                short_key += " ";
            short_key += words[i].text;
        }
        tags.insert(strip_forbidden(short_key, "'\n"),
                    strip_forbidden(trim((*it)[2].str()), "'\n"));
    }
    return tags;
}

StructuredMetadata RuleTagger::tag(const std::string& text, TagRole role) {
    StructuredMetadata m;
    m.chunk_type =
        role == TagRole::query ? std::string(to_string(classify(text))) : chunk_type_of(text);
    m.sentiment = sentiment_of(text);
    m.topics = topics_of(text);
    m.triples = triples_of(text);
    m.tags = tags_of(text);
    return m;
}

} // namespace srag
