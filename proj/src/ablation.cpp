#include "srag/ablation.hpp"

#include "srag/csv.hpp"
#include "srag/errors.hpp"
#include "srag/report.hpp"
#include "srag/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <optional>

namespace srag {
namespace {

using nlohmann::json;

std::string display_mask_label(const AblationMask& mask) {
    if (mask == AblationMask::full())
        return "FULL";
    for (const auto& [label, m] : leave_one_out_masks())
        if (mask == m)
            return label;
    return mask_label(mask);
}

std::uint64_t subrun_checksum(const std::vector<Document>& docs,
                              const std::vector<Query>& queries, const PipelineConfig& config,
                              const std::string& label) {
    std::string key;
    key += label;
    key += "|k=" + std::to_string(config.k);
    key += "|mode=" + std::string(to_string(config.mode));
    key += "|mask=" + mask_label(config.mask);
    key += "|chunk=" + std::to_string(config.chunking.max_chars) + "/" +
           std::to_string(config.chunking.overlap);
    key += "|dim=" + std::to_string(config.embedding_dim);
    key += "|local=" + std::string(config.local_providers ? "1" : "0");
    key += "|lexicon=" + config.lexicon_path.generic_string();
    key += "|entities=" + config.entities_path.generic_string();
    std::uint64_t h = fnv1a64(key);
    for (const Document& d : docs) {
        h = fnv1a64(d.id, h);
        h = fnv1a64(d.text, h);
    }
    for (const Query& q : queries) {
        h = fnv1a64(q.id, h);
        h = fnv1a64(q.text, h);
    }
    return h;
}

std::filesystem::path subrun_dir(const std::filesystem::path& grid_dir,
                                 const std::string& label, std::size_t k) {
    return grid_dir / label / ("k" + std::to_string(k));
}

std::optional<SubRunResult> try_load_subrun(const std::filesystem::path& dir,
                                            std::uint64_t expected_checksum,
                                            std::size_t n_queries) {
    const auto manifest_path = dir / "manifest.json";
    const auto scores_path = dir / "scores.csv";
    if (!std::filesystem::exists(manifest_path) || !std::filesystem::exists(scores_path))
        return std::nullopt;
    try {
        const json manifest = json::parse(read_text_file(manifest_path));
        if (manifest.at("status").get<std::string>() != "complete")
            return std::nullopt;
        if (manifest.at("config_checksum").get<std::string>() != to_hex(expected_checksum))
            return std::nullopt;

        const CsvTable table = read_csv(scores_path);
        if (table.rows.size() != n_queries)
            return std::nullopt;
        SubRunResult result;
        result.resumed = true;
        result.index_checksum =
            std::stoull(manifest.at("index_checksum").get<std::string>(), nullptr, 16);
        for (const CsvRow& row : table.rows) {
            SubScore s;
            s.query_id = row.at(0);
            const auto cls = query_class_from_string(row.at(1));
            if (!cls)
                return std::nullopt;
            s.query_class = *cls;
            s.score = std::stod(row.at(2));
            if (!row.at(3).empty())
                s.gold_hit = std::stoi(row.at(3));
            result.scores.push_back(std::move(s));
        }
        return result;
    } catch (...) {
        return std::nullopt; // unreadable sub-run state; recompute
    }
}

void persist_subrun(const std::filesystem::path& dir, const SubRunResult& result,
                    const std::string& label, std::size_t k, std::uint64_t config_checksum,
                    const std::string& judge_name) {
    std::filesystem::create_directories(dir);

    CsvTable table;
    table.header = {"query_id", "query_class", "score", "gold_hit"};
    for (const SubScore& s : result.scores)
        table.rows.push_back({s.query_id, std::string(to_string(s.query_class)),
                              format_double(s.score),
                              s.gold_hit ? std::to_string(*s.gold_hit) : std::string()});
    write_csv(dir / "scores.csv", table);

    json manifest;
    manifest["status"] = "complete";
    manifest["label"] = label;
    manifest["k"] = k;
    manifest["config_checksum"] = to_hex(config_checksum);
    manifest["index_checksum"] = to_hex(result.index_checksum);
    manifest["n_queries"] = result.scores.size();
    manifest["judge"] = judge_name;
    write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

SubRunResult execute_subrun(const std::vector<Document>& docs,
                            const std::vector<Query>& queries, const PipelineConfig& config,
                            GridDeps& deps, const FlatIndex* prebuilt,
                            std::string* judge_name_out) {
    std::optional<FlatIndex> own_index;
    const FlatIndex* index = prebuilt;
    if (index == nullptr) {
        own_index = ingest_corpus(docs, config, deps.tagger, deps.embedder);
        index = &*own_index;
    }

    std::unique_ptr<Judge> owned_judge;
    Judge* judge = deps.judge;
    if (judge == nullptr) {
        owned_judge = make_offline_judge(docs, queries, config.chunking);
        judge = owned_judge.get();
    }
    if (judge_name_out)
        *judge_name_out = judge->name();

    SubRunResult result;
    result.index_checksum = index->content_checksum();
    result.scores.resize(queries.size());
    parallel_for(queries.size(), config.threads, [&](std::size_t i) {
        const AnswerRecord record =
            answer_query(queries[i], config, *index, deps.llm, deps.tagger, deps.embedder);
        std::vector<std::string> context;
        context.reserve(record.retrieved.size());
        for (const SearchHit& h : record.retrieved)
            context.push_back(index->rendered_text(h.chunk_id));
        SubScore s;
        s.query_id = queries[i].id;
        s.query_class = record.query_class;
        s.score = judge->score(queries[i].id, queries[i].text, record.answer, context).value;
        if (queries[i].gold_chunk_id) {
            const bool hit = std::any_of(
                record.retrieved.begin(), record.retrieved.end(),
                [&](const SearchHit& h) { return h.chunk_id == *queries[i].gold_chunk_id; });
            s.gold_hit = hit ? 1 : 0;
        }
        result.scores[i] = std::move(s);
    });
    return result;
}

std::vector<double> score_values(const SubRunResult& r) {
    std::vector<double> out;
    out.reserve(r.scores.size());
    for (const SubScore& s : r.scores)
        out.push_back(s.score);
    return out;
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AblationRow>& rows) {
    CsvTable table;
    table.header = {"metadata_ablated", "change_in_score", "p_value"};
    for (const AblationRow& row : rows)
        if (row.label != "FULL")
            table.rows.push_back(
                {row.label, format_double(row.delta_score), format_double(row.welch_p)});
    write_csv(path, table);
}

// Sequential sub-runs over labeled masks (FULL first); a failure writes the
// rows completed so far to ablation_partial.csv and rethrows.
std::vector<AblationRow>
compute_mask_rows(const std::vector<Document>& docs, const std::vector<Query>& queries,
                  const PipelineConfig& base_config,
                  std::vector<std::pair<std::string, AblationMask>> masks,
                  const std::filesystem::path& grid_dir, GridDeps& deps) {
    const bool has_full = std::any_of(masks.begin(), masks.end(), [](const auto& m) {
        return m.second == AblationMask::full();
    });
    if (!has_full)
        masks.emplace(masks.begin(), "FULL", AblationMask::full());
    std::stable_partition(masks.begin(), masks.end(),
                          [](const auto& m) { return m.second == AblationMask::full(); });

    std::vector<AblationRow> rows;
    std::vector<double> full_scores;
    for (const auto& [label, mask] : masks) {
        PipelineConfig config = base_config;
        config.mask = mask;
        SubRunResult sub;
        try {
            sub = run_or_resume_subrun(docs, queries, config, mask_label(mask), grid_dir, deps);
        } catch (...) {
            std::filesystem::create_directories(grid_dir);
            write_ablation_csv(grid_dir / "ablation_partial.csv", rows);
            throw;
        }
        const std::vector<double> scores = score_values(sub);
        AblationRow row;
        row.label = label;
        row.n = scores.size();
        row.mean_score = mean(scores);
        if (mask == AblationMask::full()) {
            full_scores = scores;
            row.delta_score = 0.0;
            row.welch_p = 1.0;
        } else {
            row.delta_score = row.mean_score - mean(full_scores);
            row.welch_p = welch_t_test(full_scores, scores).p_two_sided;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

SubRunResult run_or_resume_subrun(const std::vector<Document>& docs,
                                  const std::vector<Query>& queries,
                                  const PipelineConfig& config, const std::string& label,
                                  const std::filesystem::path& grid_dir, GridDeps deps) {
    const std::uint64_t checksum = subrun_checksum(docs, queries, config, label);
    const std::filesystem::path dir = subrun_dir(grid_dir, label, config.k);
    if (auto loaded = try_load_subrun(dir, checksum, queries.size()))
        return std::move(*loaded);

    std::string judge_name;
    SubRunResult result = execute_subrun(docs, queries, config, deps, nullptr, &judge_name);
    persist_subrun(dir, result, label, config.k, checksum, judge_name);
    return result;
}

std::vector<AblationRow> run_marginal_ablations(const std::vector<Document>& docs,
                                                const std::vector<Query>& queries,
                                                const PipelineConfig& base_config,
                                                const std::filesystem::path& grid_dir,
                                                GridDeps deps) {
    if (base_config.mode != IndexMode::structured)
        throw InvalidArgument("run_marginal_ablations: base config must be structured");
    if (base_config.mask != AblationMask::full())
        throw InvalidArgument("run_marginal_ablations: base config must use the full mask");
    if (queries.empty())
        throw InvalidArgument("run_marginal_ablations: no queries");

    std::vector<std::pair<std::string, AblationMask>> masks;
    masks.emplace_back("FULL", AblationMask::full());
    for (const auto& [label, mask] : leave_one_out_masks())
        masks.emplace_back(label, mask);
    return compute_mask_rows(docs, queries, base_config, std::move(masks), grid_dir, deps);
}

std::vector<KSweepEntry> run_k_sweep(const std::vector<Document>& docs,
                                     const std::vector<Query>& queries,
                                     const PipelineConfig& base_config,
                                     const std::vector<std::size_t>& ks,
                                     const std::filesystem::path& grid_dir, GridDeps deps) {
    if (ks.empty())
        throw InvalidArgument("run_k_sweep: ks must be non-empty");
    for (std::size_t k : ks)
        if (k == 0)
            throw InvalidArgument("run_k_sweep: k values must be positive");
    if (queries.empty())
        throw InvalidArgument("run_k_sweep: no queries");

    // The two indices are retrieval-time invariant: built lazily once, shared
    // by every k that actually executes.
    std::optional<FlatIndex> plain_index;
    std::optional<FlatIndex> structured_index;
    const auto index_for = [&](const PipelineConfig& config) -> const FlatIndex* {
        auto& slot = config.mode == IndexMode::plain ? plain_index : structured_index;
        if (!slot)
            slot = ingest_corpus(docs, config, deps.tagger, deps.embedder);
        return &*slot;
    };

    const auto subrun_at = [&](IndexMode mode, std::size_t k, const std::string& label) {
        PipelineConfig config = base_config;
        config.mode = mode;
        config.mask = AblationMask::full();
        config.k = k;
        const std::uint64_t checksum = subrun_checksum(docs, queries, config, label);
        const std::filesystem::path dir = subrun_dir(grid_dir, label, k);
        if (auto loaded = try_load_subrun(dir, checksum, queries.size()))
            return std::move(*loaded);
        std::string judge_name;
        SubRunResult result =
            execute_subrun(docs, queries, config, deps, index_for(config), &judge_name);
        persist_subrun(dir, result, label, k, checksum, judge_name);
        return result;
    };

    std::vector<KSweepEntry> entries;
    for (std::size_t k : ks) {
        const SubRunResult plain = subrun_at(IndexMode::plain, k, "PRAG");
        const SubRunResult structured = subrun_at(IndexMode::structured, k, "FULL");

        KSweepEntry entry;
        entry.k = k;
        entry.plain_checksum = plain.index_checksum;
        entry.structured_checksum = structured.index_checksum;

        std::vector<EvalRecord> records(queries.size());
        for (std::size_t i = 0; i < queries.size(); ++i) {
            records[i].query_id = queries[i].id;
            records[i].query_class = structured.scores[i].query_class;
            records[i].prag_score = JudgeScore{plain.scores[i].score};
            records[i].srag_score = JudgeScore{structured.scores[i].score};
        }
        entry.breakdown = class_breakdown(records);

        const bool all_gold =
            std::all_of(plain.scores.begin(), plain.scores.end(),
                        [](const SubScore& s) { return s.gold_hit.has_value(); }) &&
            std::all_of(structured.scores.begin(), structured.scores.end(),
                        [](const SubScore& s) { return s.gold_hit.has_value(); });
        if (all_gold && queries.size() >= 2) {
            RecallSummary recall;
            recall.n_queries = queries.size();
            std::vector<double> plain_ind;
            std::vector<double> structured_ind;
            for (std::size_t i = 0; i < queries.size(); ++i) {
                recall.prag_hits.push_back(*plain.scores[i].gold_hit);
                recall.srag_hits.push_back(*structured.scores[i].gold_hit);
                plain_ind.push_back(*plain.scores[i].gold_hit);
                structured_ind.push_back(*structured.scores[i].gold_hit);
            }
            recall.prag_recall = mean(plain_ind);
            recall.srag_recall = mean(structured_ind);
            recall.hit_welch = welch_t_test(structured_ind, plain_ind);
            entry.recall = std::move(recall);
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

GridSpec load_grid_spec(const std::filesystem::path& path) {
    const std::string content = read_text_file(path);
    const auto kv = parse_key_value_file(content, "grid spec " + path.string());
    const std::filesystem::path base =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    GridSpec spec;
    bool have_masks = false;
    for (const auto& [key, value] : kv) {
        if (key == "queries") {
            spec.queries = std::filesystem::path(value).is_absolute()
                               ? std::filesystem::path(value)
                               : base / value;
        } else if (key == "masks") {
            have_masks = true;
            spec.masks.clear();
            std::size_t start = 0;
            while (start <= value.size()) {
                std::size_t comma = value.find(',', start);
                // bits:XXXXX specs contain no commas; plain comma split works.
                if (comma == std::string::npos)
                    comma = value.size();
                std::string token = value.substr(start, comma - start);
                start = comma + 1;
                while (!token.empty() && token.front() == ' ')
                    token.erase(token.begin());
                while (!token.empty() && token.back() == ' ')
                    token.pop_back();
                if (token.empty())
                    continue;
                const AblationMask mask = parse_mask_spec(token);
                spec.masks.emplace_back(display_mask_label(mask), mask);
            }
        } else if (key == "ks") {
            spec.ks.clear();
            std::size_t start = 0;
            while (start <= value.size()) {
                std::size_t comma = value.find(',', start);
                if (comma == std::string::npos)
                    comma = value.size();
                const std::string token = value.substr(start, comma - start);
                start = comma + 1;
                if (token.find_first_not_of(" \t") == std::string::npos)
                    continue;
                spec.ks.push_back(static_cast<std::size_t>(std::stoul(token)));
            }
        } else if (!apply_config_key(spec.base, key, value, base)) {
            throw IoError("grid spec " + path.string() + ": unknown key '" + key + "'");
        }
    }
    if (!have_masks) {
        spec.masks.emplace_back("FULL", AblationMask::full());
        for (const auto& [label, mask] : leave_one_out_masks())
            spec.masks.emplace_back(label, mask);
    }
    if (spec.queries.empty())
        throw IoError("grid spec " + path.string() + ": missing 'queries' key");
    spec.base.pipeline.mode = IndexMode::structured;
    spec.base.pipeline.mask = AblationMask::full();
    return spec;
}

void run_grid(const GridSpec& spec, const std::filesystem::path& out_dir) {
    const std::vector<Document> docs = load_corpus(spec.base.corpus, spec.base.corpus_format);
    const std::vector<Query> queries = load_queries(spec.queries);
    Providers providers = make_providers(spec.base.pipeline);
    GridDeps deps{*providers.tagger, *providers.embedder, *providers.answerer,
                  providers.judge.get()};

    std::filesystem::create_directories(out_dir);

    std::string grid_text = config_snapshot(spec.base);
    grid_text += "queries = " + spec.queries.generic_string() + "\n";
    grid_text += "ks =";
    for (std::size_t k : spec.ks)
        grid_text += " " + std::to_string(k);
    grid_text += "\nmasks =";
    for (const auto& [label, mask] : spec.masks)
        grid_text += " " + mask_label(mask);
    grid_text += "\n";
    const std::string grid_id = "grid-" + to_hex(fnv1a64(grid_text));

    // Marker first, finalized manifest after every artifact is on disk.
    {
        json started;
        started["grid_id"] = grid_id;
        started["status"] = "running";
        started["deterministic"] = spec.base.pipeline.local_providers;
        started["spec"] = grid_text;
        write_text_file(out_dir / "grid_manifest.json", started.dump(2) + "\n");
    }

    // Marginal ablations against FULL, in spec order. The canonical grid is
    // FULL plus the five leave-one-out masks; arbitrary masks run through the
    // same machinery.
    const std::vector<AblationRow> rows =
        compute_mask_rows(docs, queries, spec.base.pipeline, spec.masks, out_dir, deps);
    write_ablation_csv(out_dir / "ablation.csv", rows);

    // k-sweep over plain vs structured (full mask).
    const std::vector<KSweepEntry> sweep =
        run_k_sweep(docs, queries, spec.base.pipeline, spec.ks, out_dir, deps);
    bool any_recall = false;
    CsvTable recall_table;
    recall_table.header = {"k", "plain_recall", "structured_recall", "gap", "hit_welch_p"};
    for (const KSweepEntry& entry : sweep) {
        CsvTable per_k;
        per_k.header = breakdown_csv_header();
        for (const BreakdownRow& row : entry.breakdown)
            per_k.rows.push_back(breakdown_csv_row(row));
        write_csv(out_dir / ("ksweep_class_scores_k" + std::to_string(entry.k) + ".csv"),
                  per_k);
        if (entry.recall) {
            any_recall = true;
            recall_table.rows.push_back(
                {std::to_string(entry.k), format_double(entry.recall->prag_recall),
                 format_double(entry.recall->srag_recall),
                 format_double(entry.recall->srag_recall - entry.recall->prag_recall),
                 format_double(entry.recall->hit_welch.p_two_sided)});
        }
    }
    if (any_recall)
        write_csv(out_dir / "ksweep_recall.csv", recall_table);

    json manifest;
    {
        manifest["grid_id"] = grid_id;
        manifest["status"] = "complete";
        manifest["deterministic"] = spec.base.pipeline.local_providers;
        manifest["spec"] = grid_text;
        manifest["rows"] = json::array();
        for (const AblationRow& row : rows)
            manifest["rows"].push_back({{"label", row.label},
                                        {"mean_score", row.mean_score},
                                        {"delta_score", row.delta_score},
                                        {"p_value", row.welch_p},
                                        {"n", row.n}});
        manifest["ksweep"] = json::array();
        for (const KSweepEntry& entry : sweep) {
            json j = {{"k", entry.k},
                      {"plain_checksum", to_hex(entry.plain_checksum)},
                      {"structured_checksum", to_hex(entry.structured_checksum)}};
            if (entry.recall)
                j["recall"] = {{"plain", entry.recall->prag_recall},
                               {"structured", entry.recall->srag_recall},
                               {"hit_welch_p", entry.recall->hit_welch.p_two_sided}};
            manifest["ksweep"].push_back(std::move(j));
        }
    }
    write_text_file(out_dir / "grid_manifest.json", manifest.dump(2) + "\n");
}

} // namespace srag
