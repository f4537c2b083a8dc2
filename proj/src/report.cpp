#include "srag/report.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>

namespace srag {
namespace {

using nlohmann::json;

constexpr const char* kEpochTimestamp = "1970-01-01T00:00:00Z";

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json hit_to_json(const SearchHit& h) {
    return {{"chunk_id", h.chunk_id}, {"score", h.score}, {"rank", h.rank}};
}

json record_to_json(const AnswerRecord& r) {
    json hits = json::array();
    for (const SearchHit& h : r.retrieved)
        hits.push_back(hit_to_json(h));
    return {{"query_id", r.query_id},
            {"query", r.query},
            {"query_class", std::string(to_string(r.query_class))},
            {"mode", std::string(to_string(r.mode))},
            {"retrieved", std::move(hits)},
            {"answer", r.answer}};
}

json recall_to_json(const RecallSummary& r, std::size_t k) {
    return {{"k", k},
            {"n_queries", r.n_queries},
            {"plain_recall", r.prag_recall},
            {"structured_recall", r.srag_recall},
            {"gap", r.srag_recall - r.prag_recall},
            {"hit_welch_p", r.hit_welch.p_two_sided}};
}

} // namespace

CsvRow breakdown_csv_header() {
    return {"query_class", "plain_rag", "structured_rag", "p_value"};
}

CsvRow breakdown_csv_row(const BreakdownRow& row) {
    return {row.label, format_double(row.mean_prag), format_double(row.mean_srag),
            row.sufficient_n ? format_double(row.welch_p) : std::string(kInsufficientN)};
}

RunContext make_run_context(const AppConfig& config, const Providers& providers) {
    RunContext ctx;
    ctx.deterministic = config.pipeline.local_providers;
    ctx.config_text = config_snapshot(config);
    ctx.tagger_name = providers.tagger ? providers.tagger->name() : "external";
    ctx.embedder_name = providers.embedder ? providers.embedder->name() : "external";
    ctx.answerer_name = providers.answerer ? providers.answerer->name() : "external";
    ctx.judge_name = providers.judge ? providers.judge->name() : "auto";
    if (ctx.deterministic) {
        ctx.run_id = "run-" + to_hex(fnv1a64(ctx.config_text));
        ctx.timestamp = kEpochTimestamp;
    } else {
        ctx.timestamp = now_iso8601();
        ctx.run_id = "run-" + ctx.timestamp + "-" +
                     to_hex(fnv1a64(ctx.config_text)).substr(0, 8);
    }
    return ctx;
}

void write_run_started(const std::filesystem::path& out_dir, const RunContext& ctx) {
    std::filesystem::create_directories(out_dir);
    json manifest;
    manifest["run_id"] = ctx.run_id;
    manifest["status"] = "running";
    manifest["deterministic"] = ctx.deterministic;
    manifest["created"] = ctx.timestamp;
    manifest["config"] = ctx.config_text;
    manifest["providers"] = {{"tagger", ctx.tagger_name},
                             {"embedder", ctx.embedder_name},
                             {"answerer", ctx.answerer_name},
                             {"judge", ctx.judge_name}};
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void write_compare_outputs(const std::filesystem::path& out_dir, const CompareResult& result,
                           const RunContext& ctx, std::size_t k) {
    std::filesystem::create_directories(out_dir);

    CsvTable class_scores;
    class_scores.header = breakdown_csv_header();
    for (const BreakdownRow& row : result.breakdown)
        class_scores.rows.push_back(breakdown_csv_row(row));
    write_csv(out_dir / "class_scores.csv", class_scores);

    CsvTable tail;
    tail.header = {"name", "value"};
    for (const auto& [name, value] : result.tail_risk.rows())
        tail.rows.push_back({name, format_double(value)});
    write_csv(out_dir / "tail_risk.csv", tail);

    CsvTable counts;
    counts.header = {"query_class", "count"};
    for (std::size_t i = 0; i < kAllQueryClasses.size(); ++i)
        counts.rows.push_back({std::string(display_name(kAllQueryClasses[i])),
                               std::to_string(result.class_counts[i])});
    write_csv(out_dir / "class_counts.csv", counts);

    CsvTable scores;
    scores.header = {"query_id", "query_class", "plain_rag", "structured_rag", "diff"};
    for (const EvalRecord& r : result.eval_records)
        scores.rows.push_back({r.query_id, std::string(display_name(r.query_class)),
                               format_double(r.prag_score.value),
                               format_double(r.srag_score.value), format_double(r.diff())});
    write_csv(out_dir / "scores.csv", scores);

    if (result.recall) {
        CsvTable recall;
        recall.header = {"name", "value"};
        const RecallSummary& r = *result.recall;
        recall.rows.push_back({"k", std::to_string(k)});
        recall.rows.push_back({"Plain RAG Recall", format_double(r.prag_recall)});
        recall.rows.push_back({"Structured RAG Recall", format_double(r.srag_recall)});
        recall.rows.push_back({"Gap", format_double(r.srag_recall - r.prag_recall)});
        recall.rows.push_back({"Hit Welch p", format_double(r.hit_welch.p_two_sided)});
        write_csv(out_dir / "recall.csv", recall);
    }

    json results;
    results["run_id"] = ctx.run_id;
    results["judge"] = result.judge_name;
    results["scores"] = json::array();
    for (const EvalRecord& r : result.eval_records)
        results["scores"].push_back({{"query_id", r.query_id},
                                     {"query_class", std::string(to_string(r.query_class))},
                                     {"plain_rag", r.prag_score.value},
                                     {"structured_rag", r.srag_score.value},
                                     {"diff", r.diff()}});
    results["class_scores"] = json::array();
    for (const BreakdownRow& row : result.breakdown) {
        json j = {{"query_class", row.label},
                  {"n", row.n},
                  {"plain_rag", row.mean_prag},
                  {"structured_rag", row.mean_srag}};
        if (row.sufficient_n)
            j["p_value"] = row.welch_p;
        else
            j["p_value"] = nullptr;
        results["class_scores"].push_back(std::move(j));
    }
    results["tail_risk"] = json::object();
    for (const auto& [name, value] : result.tail_risk.rows())
        results["tail_risk"][name] = value;
    results["class_counts"] = json::object();
    for (std::size_t i = 0; i < kAllQueryClasses.size(); ++i)
        results["class_counts"][std::string(display_name(kAllQueryClasses[i]))] =
            result.class_counts[i];
    results["recall"] = result.recall ? recall_to_json(*result.recall, k) : json(nullptr);
    write_text_file(out_dir / "results.json", results.dump(2) + "\n");

    json manifest;
    manifest["run_id"] = ctx.run_id;
    manifest["status"] = "complete";
    manifest["deterministic"] = ctx.deterministic;
    manifest["created"] = ctx.timestamp;
    manifest["finalized"] = ctx.deterministic ? ctx.timestamp : now_iso8601();
    manifest["config"] = ctx.config_text;
    manifest["providers"] = {{"tagger", ctx.tagger_name},
                             {"embedder", ctx.embedder_name},
                             {"answerer", ctx.answerer_name},
                             {"judge", result.judge_name}};
    manifest["indices"] = {{"plain_checksum", to_hex(result.prag.index_checksum)},
                           {"structured_checksum", to_hex(result.srag.index_checksum)}};
    json prag_records = json::array();
    for (const AnswerRecord& r : result.prag.records)
        prag_records.push_back(record_to_json(r));
    json srag_records = json::array();
    for (const AnswerRecord& r : result.srag.records)
        srag_records.push_back(record_to_json(r));
    manifest["answer_records"] = {{"plain", std::move(prag_records)},
                                  {"structured", std::move(srag_records)}};
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void validate_compare_outputs(const std::filesystem::path& out_dir, std::size_t n_queries,
                              bool with_recall) {
    const CsvTable class_scores = read_csv(out_dir / "class_scores.csv");
    if (class_scores.header != breakdown_csv_header())
        throw IoError("class_scores.csv: unexpected header");
    if (class_scores.rows.empty() || class_scores.rows.front().front() != "All Queries")
        throw IoError("class_scores.csv: missing All Queries row");

    const CsvTable tail = read_csv(out_dir / "tail_risk.csv");
    if (tail.rows.size() != 9)
        throw IoError("tail_risk.csv: expected 9 rows, found " +
                      std::to_string(tail.rows.size()));

    const CsvTable counts = read_csv(out_dir / "class_counts.csv");
    std::size_t total = 0;
    for (const CsvRow& row : counts.rows)
        total += static_cast<std::size_t>(std::stoull(row.at(1)));
    if (total != n_queries)
        throw IoError("class_counts.csv: counts sum to " + std::to_string(total) +
                      ", expected " + std::to_string(n_queries));

    const CsvTable scores = read_csv(out_dir / "scores.csv");
    if (scores.rows.size() != n_queries)
        throw IoError("scores.csv: expected one row per query");

    if (with_recall)
        (void)read_csv(out_dir / "recall.csv");

    const json results = json::parse(read_text_file(out_dir / "results.json"));
    if (results.at("scores").size() != n_queries)
        throw IoError("results.json: score count mismatch");
    const json manifest = json::parse(read_text_file(out_dir / "manifest.json"));
    if (manifest.at("status").get<std::string>() != "complete")
        throw IoError("manifest.json: run not finalized");
    if (manifest.at("answer_records").at("plain").size() != n_queries ||
        manifest.at("answer_records").at("structured").size() != n_queries)
        throw IoError("manifest.json: answer record count mismatch");
}

} // namespace srag
