#include "srag/ablation.hpp"
#include "srag/config.hpp"
#include "srag/csv.hpp"
#include "srag/errors.hpp"
#include "srag/index.hpp"
#include "srag/pipeline.hpp"
#include "srag/report.hpp"
#include "srag/synthetic.hpp"
#include "srag/util.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace {

using namespace srag;

// Flag values shared by the subcommands; only flags the user passed override
// the config file.
struct Overrides {
    std::string mode;
    long k = -1;
    bool local_providers = false;
    bool no_semantic_tags = false;
    bool no_topics = false;
    bool no_chunk_type = false;
    bool no_kg_triples = false;
    bool no_sentiment = false;
    long threads = -1;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--mode", o.mode, "Pipeline mode: plain or structured");
    cmd->add_option("--k", o.k, "Number of retrieved chunks");
    cmd->add_flag("--local-providers", o.local_providers,
                  "Deterministic offline providers (hash embedder, rule tagger, echo answerer)");
    cmd->add_flag("--no-semantic-tags", o.no_semantic_tags, "Ablate the Tags section");
    cmd->add_flag("--no-topics", o.no_topics, "Ablate the Topics section");
    cmd->add_flag("--no-chunk-type", o.no_chunk_type, "Ablate the Type section");
    cmd->add_flag("--no-kg-triples", o.no_kg_triples, "Ablate the KG Triples section");
    cmd->add_flag("--no-sentiment", o.no_sentiment, "Ablate the Sentiment section");
    cmd->add_option("--threads", o.threads, "Worker threads for per-query work");
}

void apply_overrides(AppConfig& config, const Overrides& o) {
    PipelineConfig& p = config.pipeline;
    if (!o.mode.empty()) {
        if (o.mode == "plain")
            p.mode = IndexMode::plain;
        else if (o.mode == "structured")
            p.mode = IndexMode::structured;
        else
            throw InvalidArgument("--mode must be plain or structured");
    }
    if (o.k > 0)
        p.k = static_cast<std::size_t>(o.k);
    if (o.local_providers)
        p.local_providers = true;
    if (o.no_semantic_tags)
        p.mask.semantic_tags = false;
    if (o.no_topics)
        p.mask.topics = false;
    if (o.no_chunk_type)
        p.mask.chunk_type = false;
    if (o.no_kg_triples)
        p.mask.kg_triples = false;
    if (o.no_sentiment)
        p.mask.sentiment = false;
    if (o.threads > 0)
        p.threads = static_cast<std::size_t>(o.threads);
}

int cmd_ingest(const std::string& config_path, const std::string& corpus_path,
               const std::string& out_path, const Overrides& overrides) {
    AppConfig config = load_app_config(config_path);
    apply_overrides(config, overrides);
    if (!corpus_path.empty())
        config.corpus = corpus_path;
    if (config.corpus.empty())
        throw InvalidArgument("no corpus configured: pass --corpus or set it in the config");

    const std::vector<Document> docs = load_corpus(config.corpus, config.corpus_format);
    Providers providers = make_providers(config.pipeline);
    const FlatIndex index =
        ingest_corpus(docs, config.pipeline, *providers.tagger, *providers.embedder);
    index.save(out_path);

    // Trust the artifact only after it reloads cleanly.
    const FlatIndex reloaded = FlatIndex::load(out_path);
    if (reloaded.size() != index.size() ||
        reloaded.content_checksum() != index.content_checksum())
        throw IoError("index verification failed after save: " + out_path);

    std::cout << "indexed " << index.size() << " chunks (" << to_string(index.mode())
              << ", dim " << index.dim() << ") -> " << out_path << "\n";
    return 0;
}

int cmd_ask(const std::string& config_path, const std::string& index_path,
            const std::string& question, const Overrides& overrides) {
    AppConfig config = load_app_config(config_path);
    apply_overrides(config, overrides);

    const FlatIndex index = FlatIndex::load(index_path);
    config.pipeline.mode = index.mode();
    Providers providers = make_providers(config.pipeline);

    Query query;
    query.id = "cli";
    query.text = question;
    const AnswerRecord record = answer_query(query, config.pipeline, index, *providers.answerer,
                                             *providers.tagger, *providers.embedder);
    std::cout << "class: " << display_name(record.query_class) << "\n";
    for (const SearchHit& hit : record.retrieved)
        std::cout << "  [" << hit.rank << "] " << hit.chunk_id << "  score "
                  << format_double(hit.score) << "\n";
    std::cout << "\n" << record.answer << "\n";
    return 0;
}

int cmd_compare(const std::string& config_path, const std::string& queries_path,
                const std::string& out_dir, const Overrides& overrides) {
    AppConfig config = load_app_config(config_path);
    apply_overrides(config, overrides);
    if (config.corpus.empty())
        throw InvalidArgument("config must set 'corpus' for compare");

    const std::vector<Document> docs = load_corpus(config.corpus, config.corpus_format);
    const std::vector<Query> queries = load_queries(queries_path);
    Providers providers = make_providers(config.pipeline);

    RunContext ctx = make_run_context(config, providers);
    write_run_started(out_dir, ctx);
    const CompareResult result =
        run_compare(docs, queries, config.pipeline, *providers.tagger, *providers.embedder,
                    *providers.answerer, providers.judge.get());
    ctx.judge_name = result.judge_name;
    write_compare_outputs(out_dir, result, ctx, config.pipeline.k);
    validate_compare_outputs(out_dir, queries.size(), result.recall.has_value());

    for (const BreakdownRow& row : result.breakdown) {
        std::cout << row.label << ": plain " << format_double(row.mean_prag) << ", structured "
                  << format_double(row.mean_srag);
        if (row.sufficient_n)
            std::cout << ", p " << format_double(row.welch_p);
        std::cout << "\n";
    }
    if (result.recall)
        std::cout << "recall@" << config.pipeline.k << ": plain "
                  << format_double(result.recall->prag_recall) << ", structured "
                  << format_double(result.recall->srag_recall) << "\n";
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

int cmd_ablate(const std::string& grid_path, const std::string& out_dir) {
    const GridSpec spec = load_grid_spec(grid_path);
    run_grid(spec, out_dir);
    const CsvTable ablation = read_csv(std::filesystem::path(out_dir) / "ablation.csv");
    for (const CsvRow& row : ablation.rows)
        std::cout << row.at(0) << ": delta " << row.at(1) << ", p " << row.at(2) << "\n";
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& in_dir) {
    const std::filesystem::path dir(in_dir);
    std::vector<std::filesystem::path> tables;
    for (const char* name :
         {"class_scores.csv", "tail_risk.csv", "class_counts.csv", "scores.csv", "recall.csv",
          "ablation.csv", "ksweep_recall.csv"}) {
        if (std::filesystem::exists(dir / name))
            tables.push_back(dir / name);
    }
    if (std::filesystem::is_directory(dir)) {
        std::vector<std::filesystem::path> sweep;
        for (const auto& entry : std::filesystem::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (entry.is_regular_file() && name.starts_with("ksweep_class_scores_") &&
                name.ends_with(".csv"))
                sweep.push_back(entry.path());
        }
        std::sort(sweep.begin(), sweep.end());
        tables.insert(tables.end(), sweep.begin(), sweep.end());
    }
    if (tables.empty())
        throw IoError("no report files found under " + in_dir);

    for (const auto& path : tables) {
        const CsvTable table = read_csv(path);
        std::cout << "== " << path.filename().string() << " ==\n";
        std::cout << to_csv_line(table.header) << "\n";
        for (const CsvRow& row : table.rows)
            std::cout << to_csv_line(row) << "\n";
        std::cout << "\n";
    }
    return 0;
}

int cmd_synth(const std::string& out_dir, std::uint64_t seed, std::size_t entities,
              std::size_t topics, std::size_t queries) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.n_entities = entities;
    spec.n_topics = topics;
    spec.n_queries = queries;
    const SyntheticWorld world = make_synthetic_world(spec);
    write_synthetic_world(world, out_dir);
    std::cout << "wrote " << world.documents.size() << " documents and "
              << world.queries.size() << " queries to " << out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured-RAG toolkit: metadata-enriched retrieval with a built-in "
                 "plain-vs-structured comparison harness"};
    app.require_subcommand(1);

    Overrides overrides;

    auto* ingest = app.add_subcommand("ingest", "Chunk, tag, embed and index a corpus");
    std::string config_path;
    std::string corpus_path;
    std::string out_index;
    ingest->add_option("--config", config_path, "Config file")->required();
    ingest->add_option("--corpus", corpus_path, "Corpus path (overrides config)");
    ingest->add_option("--out", out_index, "Output index file")->required();
    add_override_flags(ingest, overrides);

    auto* ask = app.add_subcommand("ask", "Answer one question against a saved index");
    std::string index_path;
    std::string question;
    ask->add_option("--config", config_path, "Config file")->required();
    ask->add_option("--index", index_path, "Index file")->required();
    ask->add_option("--query", question, "Question text")->required();
    add_override_flags(ask, overrides);

    auto* compare = app.add_subcommand(
        "compare", "Run plain and structured systems end-to-end and emit the report tables");
    std::string queries_path;
    std::string out_dir;
    compare->add_option("--config", config_path, "Config file")->required();
    compare->add_option("--queries", queries_path, "Queries JSONL file")->required();
    compare->add_option("--out", out_dir, "Output directory")->required();
    add_override_flags(compare, overrides);

    auto* ablate =
        app.add_subcommand("ablate", "Run the (resumable) ablation grid and k-sweep");
    std::string grid_path;
    ablate->add_option("--grid", grid_path, "Grid spec file")->required();
    ablate->add_option("--out", out_dir, "Output directory")->required();

    auto* report = app.add_subcommand("report", "Re-read and print emitted report tables");
    std::string in_dir;
    report->add_option("--in", in_dir, "Directory with report files")->required();

    auto* synth = app.add_subcommand("synth", "Generate the deterministic benchmark corpus");
    std::uint64_t seed = 7;
    std::size_t n_entities = 17;
    std::size_t n_topics = 12;
    std::size_t n_queries = 60;
    synth->add_option("--out", out_dir, "Output directory")->required();
    synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--entities", n_entities, "Number of entities");
    synth->add_option("--topics", n_topics, "Number of topic concepts");
    synth->add_option("--queries", n_queries, "Number of queries");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed())
            return cmd_ingest(config_path, corpus_path, out_index, overrides);
        if (ask->parsed())
            return cmd_ask(config_path, index_path, question, overrides);
        if (compare->parsed())
            return cmd_compare(config_path, queries_path, out_dir, overrides);
        if (ablate->parsed())
            return cmd_ablate(grid_path, out_dir);
        if (report->parsed())
            return cmd_report(in_dir);
        if (synth->parsed())
            return cmd_synth(out_dir, seed, n_entities, n_topics, n_queries);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
