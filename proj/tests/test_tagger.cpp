#include "srag/tagger.hpp"

#include "srag/errors.hpp"
#include "srag/metadata.hpp"
#include "srag/util.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

using namespace srag;

namespace {

bool has_topic(const StructuredMetadata& m, std::string_view topic) {
    return std::find(m.topics.begin(), m.topics.end(), topic) != m.topics.end();
}

} // namespace

TEST_CASE("classify: first-match precedence over the pattern list") {
    RuleTagger tagger;
    CHECK(tagger.classify("How does Apple's valuation multiple compare to its historical "
                          "average?") == QueryClass::comparative);
    CHECK(tagger.classify("What is the expected EPS for Apple in FY2026E?") ==
          QueryClass::predictive);
    CHECK(tagger.classify("Why does margin pressure persist?") == QueryClass::analytical);
    CHECK(tagger.classify("How much revenue came from services?") == QueryClass::quantitative);
    CHECK(tagger.classify("Who approved the buyback?") == QueryClass::information_lookup);
    // No rule fires: declared fallback.
    CHECK(tagger.classify("What is revenue in Q1?") == QueryClass::informational);
    // "compare" outranks the later "how does" rule.
    CHECK(tagger.classify("How does revenue compare with peers?") == QueryClass::comparative);
}

TEST_CASE("classify: closed set over arbitrary input") {
    RuleTagger tagger;
    SplitMix64 rng(6);
    const std::vector<std::string> words = {"alpha", "Beta",  "42",    "margin", "when",
                                            "forecast", "zzz", "peers", "$",     "..."};
    for (int trial = 0; trial < 100; ++trial) {
        std::string q;
        const std::size_t n = 1 + rng.below(8);
        for (std::size_t i = 0; i < n; ++i) {
            if (i)
                q += " ";
            q += words[rng.below(words.size())];
        }
        const QueryClass c = tagger.classify(q);
        CHECK(std::find(kAllQueryClasses.begin(), kAllQueryClasses.end(), c) !=
              kAllQueryClasses.end());
    }
}

TEST_CASE("tag: comparative revenue text gets the rule-table type and Revenue topic") {
    RuleTagger tagger;
    const std::string text = "Please compare the revenue trend across segments.";
    const StructuredMetadata as_query = tag_text(text, TagRole::query, tagger);
    CHECK(as_query.chunk_type == "comparative");
    CHECK(has_topic(as_query, "Revenue"));

    const StructuredMetadata as_chunk = tag_text(text, TagRole::chunk, tagger);
    CHECK(as_chunk.chunk_type == "narrative");
    CHECK(has_topic(as_chunk, "Revenue"));
}

TEST_CASE("tag: deterministic across calls") {
    RuleTagger tagger;
    const std::string text =
        "Apple reported strong revenue growth. EPS: 7.10\nFair Value: $220";
    const StructuredMetadata once = tag_text(text, TagRole::chunk, tagger);
    const StructuredMetadata twice = tag_text(text, TagRole::chunk, tagger);
    CHECK(once == twice);
}

TEST_CASE("tag: numeric density drives the chunk type") {
    RuleTagger tagger;
    const std::string table = "EPS 7.10 margin 30 2025 410 101 97 22 5";
    CHECK(tagger.tag(table, TagRole::chunk).chunk_type == "financial_table");
    const std::string prose =
        "The committee discussed broad themes without citing any figures at all.";
    CHECK(tagger.tag(prose, TagRole::chunk).chunk_type == "narrative");
}

TEST_CASE("tag: sentiment lexicon counts with neutral ties") {
    RuleTagger tagger;
    CHECK(tagger.tag("Strong growth and a raised outlook.", TagRole::chunk).sentiment ==
          Sentiment::positive);
    CHECK(tagger.tag("Weak quarter with loss and risk.", TagRole::chunk).sentiment ==
          Sentiment::negative);
    CHECK(tagger.tag("Strong growth offset by loss and risk.", TagRole::chunk).sentiment ==
          Sentiment::neutral);
    CHECK(tagger.tag("Plain statement of facts.", TagRole::chunk).sentiment ==
          Sentiment::neutral);
}

TEST_CASE("tag: triples come from sentences led by a known entity") {
    RuleTagger tagger;
    const StructuredMetadata m = tag_text(
        "Apple reported resilient growth in services. The weather was mild. "
        "Microsoft raised guidance for the cloud segment.",
        TagRole::chunk, tagger);
    REQUIRE(m.triples.size() == 2);
    CHECK(m.triples[0].subject == "Apple");
    CHECK(m.triples[0].relation == "reported");
    CHECK(m.triples[0].object == "resilient growth in services");
    CHECK(m.triples[1].subject == "Microsoft");
    CHECK(m.triples[1].relation == "raised");
    for (const KGTriple& t : m.triples) {
        CHECK(t.object.find("->") == std::string::npos);
        CHECK(t.object.find(';') == std::string::npos);
    }
}

TEST_CASE("tag: entity matches respect word boundaries") {
    RuleTaggerConfig config = RuleTaggerConfig::defaults();
    config.entities = {"Apple"};
    RuleTagger tagger(std::move(config));
    const StructuredMetadata m =
        tagger.tag("Applesauce futures rallied through lunch.", TagRole::chunk);
    CHECK(m.triples.empty());
}

TEST_CASE("tag: key-value lines and metric-of patterns become tags") {
    RuleTagger tagger;
    const StructuredMetadata m = tag_text("Fair Value: $220\nCMP: $195\n"
                                          "The company posted net income of $97 bn this year.",
                                          TagRole::chunk, tagger);
    CHECK(m.tags.contains("Fair Value"));
    CHECK(m.tags.contains("CMP"));
    bool metric_found = false;
    for (const auto& [k, v] : m.tags.entries())
        if (k.find("income") != std::string::npos && v.find("$97") != std::string::npos)
            metric_found = true;
    CHECK(metric_found);
    validate_metadata(to_partial(m, AblationMask::full()));
}

TEST_CASE("tag: topics fall back to capitalized phrases, then tokens") {
    RuleTaggerConfig config;
    config.topics = {};           // empty lexicon: force the fallbacks
    config.entities = {};
    RuleTagger tagger(std::move(config));
    const StructuredMetadata capitalized =
        tagger.tag("The Supply Chain update and the Supply Chain review.", TagRole::chunk);
    CHECK(!capitalized.topics.empty());
    CHECK(capitalized.topics.front() == "Supply Chain");

    const StructuredMetadata lowercase = tagger.tag("nothing but lowercase words", TagRole::chunk);
    REQUIRE(!lowercase.topics.empty());
    CHECK(lowercase.topics.front() == "Nothing");
}

TEST_CASE("tag: empty text is rejected") {
    RuleTagger tagger;
    CHECK_THROWS_AS(tag_text("", TagRole::chunk, tagger), InvalidArgument);
    CHECK_THROWS_AS(classify_query("", tagger), InvalidArgument);
}

TEST_CASE("lexicon and entity files round through the loaders") {
    const auto dir = std::filesystem::temp_directory_path() / "srag_tagger_cfg";
    std::filesystem::create_directories(dir);
    write_text_file(dir / "lexicon.txt",
                    "# comment line\n"
                    "Margin Outlook | margin trajectory | profitability path\n"
                    "Liquidity\n");
    write_text_file(dir / "entities.txt", "Acme Industrial\nZenith\n");

    const std::vector<TopicRule> rules = load_topic_lexicon(dir / "lexicon.txt");
    REQUIRE(rules.size() == 2);
    CHECK(rules[0].canonical == "Margin Outlook");
    REQUIRE(rules[0].patterns.size() == 2);
    CHECK(rules[0].patterns[0] == "margin trajectory");
    // A rule without patterns falls back to its lowercased canonical.
    CHECK(rules[1].patterns == std::vector<std::string>{"liquidity"});

    const std::vector<std::string> entities = load_entity_list(dir / "entities.txt");
    CHECK(entities == std::vector<std::string>{"Acme Industrial", "Zenith"});

    RuleTaggerConfig config = RuleTaggerConfig::defaults();
    config.topics = rules;
    config.entities = entities;
    RuleTagger tagger(std::move(config));
    const StructuredMetadata m = tagger.tag(
        "Acme Industrial highlighted the margin trajectory improving this year.", TagRole::chunk);
    CHECK(has_topic(m, "Margin Outlook"));
    REQUIRE(!m.triples.empty());
    CHECK(m.triples[0].subject == "Acme Industrial");
}

TEST_CASE("tag_text output always satisfies the metadata invariants") {
    RuleTagger tagger;
    SplitMix64 rng(123);
    const std::vector<std::string> snippets = {
        "Apple raised guidance.",     "margin 30% and $12 of costs", "Fair Value: $220",
        "why does this work",         "Revenue Growth was strong;",  "a: b\nc: d",
        "compare versus peers 2030E", "growth -> risk ; loss",
    };
    for (int trial = 0; trial < 60; ++trial) {
        std::string text;
        const std::size_t n = 1 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i) {
            text += snippets[rng.below(snippets.size())];
            text += " ";
        }
        const StructuredMetadata m = tag_text(text, TagRole::chunk, tagger);
        validate_metadata(to_partial(m, AblationMask::full()));
        CHECK(!m.topics.empty());
        const StructuredMetadata q = tag_text(text, TagRole::query, tagger);
        CHECK(query_class_from_string(q.chunk_type).has_value());
    }
}
