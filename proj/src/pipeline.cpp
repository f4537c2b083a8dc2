#include "srag/pipeline.hpp"

#include "srag/errors.hpp"
#include "srag/openai_client.hpp"
#include "srag/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>

namespace srag {
namespace {

using nlohmann::json;

std::string resolve_api_key(const std::string& env_name) {
    if (env_name.empty())
        return {};
    const char* value = std::getenv(env_name.c_str());
    return value ? value : "";
}

} // namespace

const char* const kAnswerSystemPrompt =
    "You are a research assistant. Answer the question using only the numbered context "
    "sections below. If the context does not contain the answer, say so.";

std::vector<Query> load_queries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open queries file: " + path.string());

    std::vector<Query> queries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::exception& e) {
            throw IoError("queries line " + std::to_string(line_no) + ": " + e.what());
        }
        Query q;
        try {
            q.id = obj.at("id").get<std::string>();
            q.text = obj.at("text").get<std::string>();
            if (obj.contains("gold_chunk_id"))
                q.gold_chunk_id = obj.at("gold_chunk_id").get<std::string>();
        } catch (const json::exception& e) {
            throw IoError("queries line " + std::to_string(line_no) + ": " + e.what());
        }
        if (q.id.empty() || q.text.empty())
            throw IoError("queries line " + std::to_string(line_no) + ": empty id or text");
        queries.push_back(std::move(q));
    }
    return queries;
}

FlatIndex ingest_corpus(const std::vector<Document>& docs, const PipelineConfig& config,
                        Tagger& tagger, EmbeddingProvider& embedder) {
    std::vector<Chunk> chunks;
    for (const auto& doc : docs) {
        auto doc_chunks = chunk_document(doc, config.chunking);
        std::move(doc_chunks.begin(), doc_chunks.end(), std::back_inserter(chunks));
    }

    std::vector<std::string> rendered(chunks.size());
    std::vector<PartialMetadata> metadata(chunks.size());
    const bool structured = config.mode == IndexMode::structured;

    parallel_for(chunks.size(), config.threads, [&](std::size_t i) {
        const Chunk& chunk = chunks[i];
        if (chunk.text.find(kMetadataHeader) != std::string::npos)
            throw InvalidArgument("ingest_corpus: chunk '" + chunk.id +
                                  "' contains the metadata block header literal");
        if (!structured) {
            rendered[i] = chunk.text;
            return;
        }
        try {
            const StructuredMetadata m = tag_text(chunk.text, TagRole::chunk, tagger);
            metadata[i] = to_partial(m, config.mask);
            rendered[i] = chunk.text + "\n\n" + render_metadata_block(m, config.mask);
        } catch (const TransportError& e) {
            throw TransportError("chunk '" + chunk.id + "': " + e.what());
        } catch (const Error& e) {
            throw ContentError("chunk '" + chunk.id + "': " + e.what());
        }
    });

    std::vector<EmbeddingVector> vectors;
    try {
        vectors = embed_texts(embedder, rendered);
    } catch (const TransportError& e) {
        throw TransportError(std::string("ingest_corpus: embedding failed: ") + e.what());
    } catch (const Error& e) {
        throw ContentError(std::string("ingest_corpus: embedding failed: ") + e.what());
    }

    const int dim = chunks.empty() ? (config.local_providers ? config.embedding_dim : 1)
                                   : static_cast<int>(vectors.front().size());
    FlatIndex index(dim, config.mode);
    std::vector<IndexEntry> entries;
    entries.reserve(chunks.size());
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        IndexEntry e;
        e.chunk_id = chunks[i].id;
        e.vector = std::move(vectors[i]);
        e.rendered_text = std::move(rendered[i]);
        e.metadata = std::move(metadata[i]);
        entries.push_back(std::move(e));
    }
    index.add(std::move(entries));
    return index;
}

AugmentedQuery augment_query(const std::string& query, const PipelineConfig& config,
                             Tagger& tagger) {
    if (query.empty())
        throw InvalidArgument("augment_query: query must be non-empty");

    AugmentedQuery out;
    if (config.mode == IndexMode::plain) {
        out.text = query;
        out.query_class = classify_query(query, tagger);
        return out;
    }
    const StructuredMetadata m = tag_text(query, TagRole::query, tagger);
    const auto cls = query_class_from_string(m.chunk_type);
    out.query_class = cls ? *cls : classify_query(query, tagger);
    out.text = query + "\n\n" + render_metadata_block(m, config.mask);
    return out;
}

std::string assemble_prompt(const std::string& question, const std::vector<SearchHit>& hits,
                            const FlatIndex& index) {
    if (hits.empty())
        throw InvalidArgument("assemble_prompt: no retrieved chunks");

    std::string prompt;
    prompt.append(kAnswerSystemPrompt);
    prompt.append("\n");
    for (const SearchHit& hit : hits) {
        prompt.append("\n[CONTEXT ").append(std::to_string(hit.rank)).append("]\n");
        prompt.append(index.rendered_text(hit.chunk_id));
        prompt.append("\n");
    }
    prompt.append("\n[QUESTION]\n").append(question).append("\n");
    return prompt;
}

AnswerRecord answer_query(const Query& query, const PipelineConfig& config,
                          const FlatIndex& index, ChatClient& llm, Tagger& tagger,
                          EmbeddingProvider& embedder) {
    if (index.mode() != config.mode)
        throw InvalidArgument("answer_query: index mode does not match config mode");

    AnswerRecord record;
    record.query_id = query.id;
    record.query = query.text;
    record.mode = config.mode;
    try {
        const AugmentedQuery augmented = augment_query(query.text, config, tagger);
        record.query_class = augmented.query_class;
        const std::vector<EmbeddingVector> qv = embed_texts(embedder, {augmented.text});
        record.retrieved = index.search_top_k(qv.front(), config.k);
        const std::string prompt = assemble_prompt(query.text, record.retrieved, index);
        record.answer = llm.complete(kAnswerSystemPrompt, prompt);
    } catch (const TransportError& e) {
        throw TransportError("query '" + query.id + "': " + e.what());
    } catch (const Error& e) {
        throw ContentError("query '" + query.id + "': " + e.what());
    }
    return record;
}

RecallSummary recall_at_k(const std::vector<Query>& queries,
                          const std::vector<AnswerRecord>& prag_records,
                          const std::vector<AnswerRecord>& srag_records) {
    if (queries.size() != prag_records.size() || queries.size() != srag_records.size())
        throw InvalidArgument("recall_at_k: record counts do not match query count");

    RecallSummary summary;
    summary.n_queries = queries.size();
    summary.prag_hits.reserve(queries.size());
    summary.srag_hits.reserve(queries.size());

    const auto hit = [](const AnswerRecord& r, const std::string& gold) {
        return std::any_of(r.retrieved.begin(), r.retrieved.end(),
                           [&](const SearchHit& h) { return h.chunk_id == gold; });
    };

    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (!queries[i].gold_chunk_id)
            throw InvalidArgument("recall_at_k: query '" + queries[i].id +
                                  "' has no gold chunk id");
        const std::string& gold = *queries[i].gold_chunk_id;
        summary.prag_hits.push_back(hit(prag_records[i], gold) ? 1 : 0);
        summary.srag_hits.push_back(hit(srag_records[i], gold) ? 1 : 0);
    }

    std::vector<double> prag_ind(summary.prag_hits.begin(), summary.prag_hits.end());
    std::vector<double> srag_ind(summary.srag_hits.begin(), summary.srag_hits.end());
    summary.prag_recall = mean(prag_ind);
    summary.srag_recall = mean(srag_ind);
    if (queries.size() >= 2)
        summary.hit_welch = welch_t_test(srag_ind, prag_ind);
    return summary;
}

CompareResult run_compare(const std::vector<Document>& docs, const std::vector<Query>& queries,
                          const PipelineConfig& config, Tagger& tagger,
                          EmbeddingProvider& embedder, ChatClient& llm, Judge* judge) {
    if (queries.empty())
        throw InvalidArgument("run_compare: no queries");

    CompareResult result;

    const auto run_mode = [&](IndexMode mode) {
        PipelineConfig mode_config = config;
        mode_config.mode = mode;
        ModeRun run;
        run.mode = mode;
        FlatIndex index = ingest_corpus(docs, mode_config, tagger, embedder);
        run.index_checksum = index.content_checksum();
        run.records.resize(queries.size());
        std::vector<std::vector<std::string>> contexts(queries.size());
        parallel_for(queries.size(), config.threads, [&](std::size_t i) {
            run.records[i] = answer_query(queries[i], mode_config, index, llm, tagger, embedder);
            for (const SearchHit& h : run.records[i].retrieved)
                contexts[i].push_back(index.rendered_text(h.chunk_id));
        });
        return std::pair{std::move(run), std::move(contexts)};
    };

    auto [prag_run, prag_contexts] = run_mode(IndexMode::plain);
    auto [srag_run, srag_contexts] = run_mode(IndexMode::structured);

    const bool all_gold = std::all_of(queries.begin(), queries.end(),
                                      [](const Query& q) { return q.gold_chunk_id.has_value(); });

    std::unique_ptr<Judge> owned_judge;
    if (judge == nullptr) {
        owned_judge = make_offline_judge(docs, queries, config.chunking);
        judge = owned_judge.get();
    }
    result.judge_name = judge->name();

    result.eval_records.resize(queries.size());
    parallel_for(queries.size(), config.threads, [&](std::size_t i) {
        EvalRecord rec;
        rec.query_id = queries[i].id;
        rec.query_class = srag_run.records[i].query_class;
        rec.prag_score = judge->score(queries[i].id, queries[i].text,
                                      prag_run.records[i].answer, prag_contexts[i]);
        rec.srag_score = judge->score(queries[i].id, queries[i].text,
                                      srag_run.records[i].answer, srag_contexts[i]);
        result.eval_records[i] = std::move(rec);
    });

    result.breakdown = class_breakdown(result.eval_records);
    result.tail_risk = tail_risk_report(result.eval_records);
    result.class_counts = class_distribution(result.eval_records);
    if (all_gold)
        result.recall = recall_at_k(queries, prag_run.records, srag_run.records);

    result.prag = std::move(prag_run);
    result.srag = std::move(srag_run);
    return result;
}

std::unique_ptr<Judge> make_offline_judge(const std::vector<Document>& docs,
                                          const std::vector<Query>& queries,
                                          const ChunkingParams& chunking) {
    const bool all_gold = std::all_of(queries.begin(), queries.end(),
                                      [](const Query& q) { return q.gold_chunk_id.has_value(); });
    if (!all_gold)
        return std::make_unique<OverlapJudge>();

    std::unordered_map<std::string, std::string> chunk_texts;
    for (const Document& doc : docs)
        for (Chunk& chunk : chunk_document(doc, chunking))
            chunk_texts.emplace(std::move(chunk.id), std::move(chunk.text));
    std::unordered_map<std::string, std::string> gold_texts;
    for (const Query& q : queries) {
        const auto it = chunk_texts.find(*q.gold_chunk_id);
        if (it == chunk_texts.end())
            throw InvalidArgument("make_offline_judge: gold chunk '" + *q.gold_chunk_id +
                                  "' not present in the corpus");
        gold_texts.emplace(q.id, it->second);
    }
    return std::make_unique<RecallJudge>(std::move(gold_texts));
}

Providers make_providers(const PipelineConfig& config) {
    Providers p;

    RuleTaggerConfig tagger_config = RuleTaggerConfig::defaults();
    if (!config.lexicon_path.empty())
        tagger_config.topics = load_topic_lexicon(config.lexicon_path);
    if (!config.entities_path.empty())
        tagger_config.entities = load_entity_list(config.entities_path);

    if (config.local_providers) {
        p.tagger = std::make_unique<RuleTagger>(std::move(tagger_config));
        p.embedder = std::make_unique<LocalHashEmbedder>(config.embedding_dim);
        p.answerer = std::make_unique<EchoChatClient>();
        return p;
    }

    const RemoteSettings& r = config.remote;
    if (r.base_url.empty())
        throw InvalidArgument("make_providers: remote base_url must be configured");
    ApiConfig api;
    api.base_url = r.base_url;
    api.api_key = resolve_api_key(r.api_key_env);
    api.timeout_seconds = r.timeout_seconds;
    api.max_retries = r.max_retries;
    api.max_in_flight = r.max_in_flight;
    api.min_request_interval_ms = r.min_request_interval_ms;

    auto client = std::make_shared<OpenAiClient>(api);
    p.transport = client;
    const std::string tagger_model = r.tagger_model.empty() ? r.answer_model : r.tagger_model;
    p.tagger = std::make_unique<LlmTagger>(*client, tagger_model);
    p.embedder = std::make_unique<RemoteEmbedder>(*client, r.embed_model, r.embed_batch_size);
    p.answerer = std::make_unique<OpenAiChatClient>(*client, r.answer_model);

    if (!r.judge_base_url.empty() && r.judge_base_url != r.base_url) {
        ApiConfig judge_api = api;
        judge_api.base_url = r.judge_base_url;
        auto judge_client = std::make_shared<OpenAiClient>(judge_api);
        p.judge_transport = judge_client;
        p.judge_chat = std::make_unique<OpenAiChatClient>(*judge_client, r.judge_model);
    } else {
        p.judge_chat = std::make_unique<OpenAiChatClient>(*client, r.judge_model);
    }
    p.judge = std::make_unique<LlmJudge>(*p.judge_chat);
    return p;
}

} // namespace srag
