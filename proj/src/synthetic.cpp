#include "srag/synthetic.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <set>

namespace srag {
namespace {

using nlohmann::json;

// One benchmark concept: canonical topics plus two deliberately disjoint
// phrasings. Documents speak report language, queries speak question
// language; only the tagger lexicon connects them. The secondary canonical
// reuses tokens unique to its own concept, widening the bridge the lexicon
// builds without leaking across concepts.
struct Concept {
    const char* canonical;
    const char* canonical2;
    std::array<const char*, 2> report_phrases;
    std::array<const char*, 2> question_phrases;
};

constexpr std::array<Concept, 14> kConcepts = {{
    {"Revenue Growth", "Topline Trajectory",
     {"topline expansion accelerated", "billings climbed steadily"},
     {"sales trajectory", "sales momentum"}},
    {"Profit Margin", "Margin Economics",
     {"unit economics thickened", "pricing power firmed"},
     {"margin profile", "profitability spread"}},
    {"Cash Flow", "Funds Conversion",
     {"cash conversion stayed brisk", "operating liquidity deepened"},
     {"free funds generation", "cashflow durability"}},
    {"Capital Returns", "Shareholder Distributions",
     {"buyback cadence quickened", "distributions to holders rose"},
     {"shareholder payout", "dividend posture"}},
    {"Debt Load", "Leverage Gearing",
     {"leverage ratios eased", "borrowings were trimmed"},
     {"indebtedness level", "balance sheet gearing"}},
    {"Inventory Health", "Warehouse Freshness",
     {"stockroom turns accelerated", "warehouse gluts cleared"},
     {"inventory freshness", "unsold goods backlog"}},
    {"Customer Demand", "Client Appetite",
     {"order books fattened", "client intake broadened"},
     {"demand pulse", "buyer appetite"}},
    {"Cost Discipline", "Expense Restraint",
     {"expense lines flattened", "overhead was pruned"},
     {"spending restraint", "cost containment"}},
    {"Market Share", "Competitive Standing",
     {"competitive footprint widened", "category penetration deepened"},
     {"share capture", "market standing"}},
    {"Product Pipeline", "Launch Slate",
     {"launch queue lengthened", "prototype flow quickened"},
     {"upcoming releases", "innovation slate"}},
    {"Workforce Stability", "Staffing Retention",
     {"attrition cooled", "staffing churn subsided"},
     {"employee retention", "talent turnover"}},
    {"Regulatory Exposure", "Compliance Pressure",
     {"compliance findings narrowed", "oversight actions receded"},
     {"legal headwinds", "rulebook pressure"}},
    {"Supply Chain", "Vendor Freight",
     {"freight bottlenecks loosened", "freight lanes normalized"},
     {"sourcing resilience", "vendor reliability"}},
    {"Utility Costs", "Utility Tariffs",
     {"power tariffs moderated", "fuel outlays settled"},
     {"electricity spend", "utility burden"}},
}};

constexpr std::array<const char*, 20> kEntityFirst = {
    "Meridian", "Aurora",  "Halcyon", "Vantage", "Cobalt",  "Summit", "Pinnacle",
    "Harbor",   "Atlas",   "Sterling", "Beacon",  "Crescent", "Orchid", "Juniper",
    "Basalt",   "Quartz",  "Sable",   "Verdant", "Lumen",   "Cascade"};

constexpr std::array<const char*, 20> kEntitySecond = {
    "Foods",    "Logistics", "Materials", "Systems",  "Holdings", "Industrial", "Networks",
    "Energy",   "Robotics",  "Textiles",  "Analytics", "Marine",   "Aviation",   "Pharma",
    "Retail",   "Mining",    "Media",     "Devices",  "Farms",    "Optics"};

constexpr std::array<const char*, 5> kLeadVerbs = {"posted", "recorded", "booked", "delivered",
                                                   "reported"};

constexpr std::array<const char*, 5> kFiller = {
    "The board examined quarterly submissions without delay.",
    "Auditors certified the ledger and signed the filings.",
    "Analysts attended the briefing and noted the commentary.",
    "Regional units consolidated their reporting calendars.",
    "The committee ratified routine governance updates.",
};

constexpr std::array<const char*, 6> kFigureKeys = {"EPS",      "Backlog", "Shipments",
                                                    "Headcount", "Capex",   "Payables"};

std::string slug(std::string_view s) {
    std::string out;
    for (unsigned char c : s) {
        if (c == ' ')
            out.push_back('-');
        else if (c >= 'A' && c <= 'Z')
            out.push_back(static_cast<char>(c - 'A' + 'a'));
        else
            out.push_back(static_cast<char>(c));
    }
    return out;
}

std::string make_document_text(const std::string& entity, const Concept& topic,
                               SplitMix64& rng) {
    std::string text;
    const char* verb = kLeadVerbs[rng.below(kLeadVerbs.size())];
    const char* phrase_a = topic.report_phrases[rng.below(2)];
    const char* phrase_b = topic.report_phrases[rng.below(2)];

    // Report style repeats the company name; that repetition is the plain
    // system's retrieval signal.
    text += entity;
    text += " ";
    text += verb;
    text += " that ";
    text += phrase_a;
    text += " across the period.\n";
    text += "Management at ";
    text += entity;
    text += " indicated that ";
    text += phrase_b;
    text += " during recent months.\n";
    text += kFiller[rng.below(kFiller.size())];
    text += "\n";

    // Every document carries the same structural skeleton (figures block,
    // tone sentence) so vector norms stay comparable and ranking reflects
    // content rather than length.
    text += "Key figures for ";
    text += entity;
    text += " follow.\n";
    for (std::size_t i = 0; i < 4; ++i) {
        const char* key = kFigureKeys[(rng.below(kFigureKeys.size()))];
        text += key;
        text += ": ";
        if (i % 2 == 0) {
            text += std::to_string(1 + rng.below(9));
            text += ".";
            text += std::to_string(10 + rng.below(90));
        } else {
            text += "$";
            text += std::to_string(1 + rng.below(40));
            text += " bn";
        }
        text += "\n";
    }

    // Seeded sentiment flavor; entity-led sentences also feed the triple
    // extractor.
    const std::uint64_t tone = rng.below(3);
    if (tone == 0) {
        text += entity;
        text += " leadership described the quarter as strong.\n";
    } else if (tone == 1) {
        text += entity;
        text += " leadership flagged a persistent risk to the plan.\n";
    } else {
        text += entity;
        text += " leadership offered a measured view of the quarter.\n";
    }

    text += kFiller[rng.below(kFiller.size())];
    text += "\n";
    return text;
}

std::string make_query_text(const std::string& entity, const Concept& topic,
                            std::size_t template_idx, SplitMix64& rng) {
    const char* phrase = topic.question_phrases[rng.below(2)];
    switch (template_idx % 6) {
    case 0: return "For " + entity + ", how does the " + std::string(phrase) +
                   " compare with peers?";
    case 1: return "What is the expected " + std::string(phrase) + " for " + entity +
                   " in FY2027E?";
    case 2: return "How does the " + std::string(phrase) + " of " + entity +
                   " impact overall efficiency?";
    case 3: return "How much " + std::string(phrase) + " did " + entity + " build up?";
    case 4: return "Who leads the " + std::string(phrase) + " program at " + entity + "?";
    default: return "Summarize the " + std::string(phrase) + " outlook at " + entity + ".";
    }
}

} // namespace

SyntheticWorld make_synthetic_world(const SyntheticSpec& spec) {
    if (spec.n_topics == 0 || spec.n_topics > kConcepts.size())
        throw InvalidArgument("make_synthetic_world: n_topics must be in [1, " +
                              std::to_string(kConcepts.size()) + "]");
    if (spec.n_entities == 0 || spec.n_entities > kEntityFirst.size())
        throw InvalidArgument("make_synthetic_world: n_entities must be in [1, " +
                              std::to_string(kEntityFirst.size()) + "]");
    if (spec.n_queries > spec.n_entities * spec.n_topics)
        throw InvalidArgument(
            "make_synthetic_world: n_queries exceeds the number of (entity, topic) pairs");

    SplitMix64 rng(spec.seed);
    SyntheticWorld world;

    std::vector<std::string> entities;
    entities.reserve(spec.n_entities);
    for (std::size_t i = 0; i < spec.n_entities; ++i)
        entities.push_back(std::string(kEntityFirst[i]) + " " + kEntitySecond[i]);

    for (std::size_t e = 0; e < spec.n_entities; ++e) {
        for (std::size_t t = 0; t < spec.n_topics; ++t) {
            Document doc;
            doc.id = slug(entities[e]) + "-" + slug(kConcepts[t].canonical);
            doc.source = "synthetic";
            doc.text = make_document_text(entities[e], kConcepts[t], rng);
            world.documents.push_back(std::move(doc));
        }
    }

    // Distinct (entity, topic) pairs for the query set.
    std::set<std::pair<std::size_t, std::size_t>> used;
    std::size_t qi = 0;
    while (world.queries.size() < spec.n_queries) {
        const std::size_t e = rng.below(spec.n_entities);
        const std::size_t t = rng.below(spec.n_topics);
        if (!used.emplace(e, t).second)
            continue;
        Query q;
        q.id = "q" + std::to_string(100 + qi);
        q.text = make_query_text(entities[e], kConcepts[t], qi, rng);
        q.gold_chunk_id = slug(entities[e]) + "-" + slug(kConcepts[t].canonical) + "#0";
        world.queries.push_back(std::move(q));
        ++qi;
    }

    for (std::size_t t = 0; t < spec.n_topics; ++t) {
        TopicRule rule;
        rule.canonical = kConcepts[t].canonical;
        for (const char* p : kConcepts[t].report_phrases)
            rule.patterns.emplace_back(p);
        for (const char* p : kConcepts[t].question_phrases)
            rule.patterns.emplace_back(p);
        TopicRule aspect = rule;
        aspect.canonical = kConcepts[t].canonical2;
        world.tagger_config.topics.push_back(std::move(rule));
        world.tagger_config.topics.push_back(std::move(aspect));
    }
    world.tagger_config.entities = entities;
    return world;
}

void write_synthetic_world(const SyntheticWorld& world, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string corpus;
    for (const Document& doc : world.documents) {
        json line = {{"id", doc.id}, {"source", doc.source}, {"text", doc.text}};
        corpus += line.dump();
        corpus += "\n";
    }
    write_text_file(dir / "corpus.jsonl", corpus);

    std::string queries;
    for (const Query& q : world.queries) {
        json line = {{"id", q.id}, {"text", q.text}};
        if (q.gold_chunk_id)
            line["gold_chunk_id"] = *q.gold_chunk_id;
        queries += line.dump();
        queries += "\n";
    }
    write_text_file(dir / "queries.jsonl", queries);

    std::string lexicon = "# canonical | pattern | pattern ...\n";
    for (const TopicRule& rule : world.tagger_config.topics) {
        lexicon += rule.canonical;
        for (const std::string& p : rule.patterns) {
            lexicon += " | ";
            lexicon += p;
        }
        lexicon += "\n";
    }
    write_text_file(dir / "lexicon.txt", lexicon);

    std::string entities;
    for (const std::string& e : world.tagger_config.entities) {
        entities += e;
        entities += "\n";
    }
    write_text_file(dir / "entities.txt", entities);

    write_text_file(dir / "config.cfg",
                    "mode = structured\n"
                    "providers = local\n"
                    "k = 5\n"
                    "max_chars = 1600\n"
                    "overlap = 200\n"
                    "embedding_dim = 256\n"
                    "corpus = corpus.jsonl\n"
                    "corpus_format = jsonl\n"
                    "lexicon = lexicon.txt\n"
                    "entities = entities.txt\n");
}

} // namespace srag
