#pragma once

#include "srag/chat.hpp"
#include "srag/corpus.hpp"
#include "srag/embedding.hpp"
#include "srag/eval.hpp"
#include "srag/index.hpp"
#include "srag/metadata.hpp"
#include "srag/tagger.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace srag {

struct RemoteSettings {
    std::string base_url;
    std::string embed_model;
    std::string answer_model;
    std::string tagger_model;   // defaults to answer_model
    std::string judge_model;
    std::string judge_base_url; // defaults to base_url
    std::string api_key_env = "SRAG_API_KEY";
    int timeout_seconds = 60;
    int max_retries = 3;
    int max_in_flight = 4;
    int min_request_interval_ms = 0;
    std::size_t embed_batch_size = 64;
};

struct PipelineConfig {
    IndexMode mode = IndexMode::structured;
    AblationMask mask = AblationMask::full(); // rendered components (structured mode only)
    std::size_t k = 5;                        // retrieved chunks
    ChunkingParams chunking;
    int embedding_dim = 256;                  // local embedder
    bool local_providers = true;
    std::size_t threads = 1;
    std::filesystem::path lexicon_path;       // optional rule-tagger vocabulary
    std::filesystem::path entities_path;      // optional known-entity list
    RemoteSettings remote;
};

struct Query {
    std::string id;
    std::string text;
    std::optional<std::string> gold_chunk_id;

    bool operator==(const Query&) const = default;
};

/// Queries file: JSONL with `id`, `text` and optional `gold_chunk_id`.
std::vector<Query> load_queries(const std::filesystem::path& path);

/// Chunks, tags (structured mode) and embeds a corpus into a fresh index.
/// Structured entries are embedded as chunk text + blank line + metadata
/// block rendered under config.mask; plain entries as raw chunk text.
/// Tagger/provider failures carry the offending chunk id.
FlatIndex ingest_corpus(const std::vector<Document>& docs, const PipelineConfig& config,
                        Tagger& tagger, EmbeddingProvider& embedder);

struct AugmentedQuery {
    std::string text;       // what gets embedded
    QueryClass query_class; // classified in both modes
};

/// Plain mode returns the query unchanged; structured mode appends the
/// query's rendered metadata block after a blank line. The query class is
/// computed either way.
AugmentedQuery augment_query(const std::string& query, const PipelineConfig& config,
                             Tagger& tagger);

/// Deterministic prompt: preamble, retrieved chunks in rank order under
/// numbered context headers (rendered text verbatim), then the question.
std::string assemble_prompt(const std::string& question, const std::vector<SearchHit>& hits,
                            const FlatIndex& index);

extern const char* const kAnswerSystemPrompt;

struct AnswerRecord {
    std::string query_id;
    std::string query;
    QueryClass query_class = QueryClass::informational;
    IndexMode mode = IndexMode::plain;
    std::vector<SearchHit> retrieved; // min(k, index size) hits
    std::string answer;

    bool operator==(const AnswerRecord&) const = default;
};

/// Full single-query pass: augment, embed, retrieve top-k, assemble, one chat
/// call at temperature 0.
AnswerRecord answer_query(const Query& query, const PipelineConfig& config,
                          const FlatIndex& index, ChatClient& llm, Tagger& tagger,
                          EmbeddingProvider& embedder);

struct RecallSummary {
    std::size_t n_queries = 0;
    double prag_recall = 0.0;
    double srag_recall = 0.0;
    WelchResult hit_welch;            // Welch on per-query 0/1 hit indicators
    std::vector<int> prag_hits;       // per query, aligned with the query list
    std::vector<int> srag_hits;
};

struct ModeRun {
    IndexMode mode = IndexMode::plain;
    std::uint64_t index_checksum = 0;
    std::vector<AnswerRecord> records;
};

struct CompareResult {
    ModeRun prag;
    ModeRun srag;
    std::vector<EvalRecord> eval_records;
    std::vector<BreakdownRow> breakdown;
    TailRiskReport tail_risk;
    std::array<std::size_t, kAllQueryClasses.size()> class_counts{};
    std::optional<RecallSummary> recall; // present when every query has a gold id
    std::string judge_name;
};

/// Runs both systems end-to-end over one corpus and query set: two ingests
/// (plain / structured under config.mask), retrieval + answering per query,
/// judging, and every report statistic. Everything except rendered texts and
/// the augmented query string is held identical across the two runs. When
/// `judge` is null an offline judge is chosen: recall-based if every query
/// carries a gold chunk id, token-overlap otherwise.
CompareResult run_compare(const std::vector<Document>& docs, const std::vector<Query>& queries,
                          const PipelineConfig& config, Tagger& tagger,
                          EmbeddingProvider& embedder, ChatClient& llm, Judge* judge = nullptr);

/// Recall summary for an already-built pair of indices at one k.
RecallSummary recall_at_k(const std::vector<Query>& queries,
                          const std::vector<AnswerRecord>& prag_records,
                          const std::vector<AnswerRecord>& srag_records);

/// Deterministic judge for offline runs: recall-based when every query
/// carries a gold chunk id (gold chunk text resolved through the chunker),
/// token-overlap otherwise.
std::unique_ptr<Judge> make_offline_judge(const std::vector<Document>& docs,
                                          const std::vector<Query>& queries,
                                          const ChunkingParams& chunking);

/// Providers resolved from config (local deterministic ones, or remote
/// clients sharing one transport budget). Transports are declared first so
/// everything referencing them is destroyed before they are.
struct Providers {
    std::shared_ptr<void> transport;       // shared remote client, if any
    std::shared_ptr<void> judge_transport; // separate judge endpoint, if any
    std::unique_ptr<ChatClient> judge_chat;
    std::unique_ptr<Tagger> tagger;
    std::unique_ptr<EmbeddingProvider> embedder;
    std::unique_ptr<ChatClient> answerer;
    std::unique_ptr<Judge> judge; // null for local providers (chosen per run)
};

Providers make_providers(const PipelineConfig& config);

} // namespace srag
