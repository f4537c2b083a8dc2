#pragma once

#include "srag/corpus.hpp"
#include "srag/pipeline.hpp"
#include "srag/tagger.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace srag {

/// Parameters for the generated benchmark corpus. One document is produced
/// per (entity, topic) pair; each document fits a single chunk, so gold chunk
/// ids are deterministic.
struct SyntheticSpec {
    std::uint64_t seed = 7;
    std::size_t n_entities = 17;
    std::size_t n_topics = 12; // capped at the built-in concept vocabulary
    std::size_t n_queries = 60;
};

struct SyntheticWorld {
    std::vector<Document> documents;
    std::vector<Query> queries;        // gold_chunk_id always set
    RuleTaggerConfig tagger_config;    // canonical topics bridging both phrasings
};

/// Deterministic benchmark world. Each document discusses one entity and one
/// topic concept in report phrasing; each query asks about an (entity, topic)
/// pair in question phrasing that shares no content words with the document.
/// The tagger lexicon maps both phrasings to one canonical topic, so the
/// structured system can align them while the plain system only sees the
/// entity overlap.
SyntheticWorld make_synthetic_world(const SyntheticSpec& spec);

/// Writes corpus.jsonl, queries.jsonl, lexicon.txt, entities.txt and a ready
/// config.cfg into `dir` (created if missing).
void write_synthetic_world(const SyntheticWorld& world, const std::filesystem::path& dir);

} // namespace srag
