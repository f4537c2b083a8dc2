#pragma once

#include "srag/config.hpp"
#include "srag/pipeline.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace srag {

/// One marginal-ablation report row.
struct AblationRow {
    std::string label; // "FULL" or one of the five leave-one-out labels
    double mean_score = 0.0;
    double delta_score = 0.0; // mean(masked) - mean(FULL); 0 for FULL by definition
    double welch_p = 1.0;     // FULL scores vs masked scores
    std::size_t n = 0;

    bool operator==(const AblationRow&) const = default;
};

/// Per-query result persisted for each sub-run, sufficient to rebuild every
/// grid statistic without re-running.
struct SubScore {
    std::string query_id;
    QueryClass query_class = QueryClass::informational;
    double score = 0.0;
    std::optional<int> gold_hit; // 0/1 when the query carries a gold id
};

struct SubRunResult {
    std::vector<SubScore> scores;
    std::uint64_t index_checksum = 0;
    bool resumed = false; // loaded from a completed on-disk sub-run
};

struct GridDeps {
    Tagger& tagger;
    EmbeddingProvider& embedder;
    ChatClient& llm;
    Judge* judge = nullptr; // null selects the offline judge
};

/// Runs (or resumes) one configuration against the query set. The sub-run
/// directory gains scores.csv and a manifest.json marked complete; a matching
/// completed manifest short-circuits the run.
SubRunResult run_or_resume_subrun(const std::vector<Document>& docs,
                                  const std::vector<Query>& queries,
                                  const PipelineConfig& config, const std::string& label,
                                  const std::filesystem::path& grid_dir, GridDeps deps);

/// FULL plus the five leave-one-out configurations at base_config.k, rows in
/// the published order (FULL first). base_config must be structured with a
/// full mask. A sub-run failure aborts the grid; completed sub-runs stay on
/// disk, and the rows finished so far are written to ablation_partial.csv.
std::vector<AblationRow> run_marginal_ablations(const std::vector<Document>& docs,
                                                const std::vector<Query>& queries,
                                                const PipelineConfig& base_config,
                                                const std::filesystem::path& grid_dir,
                                                GridDeps deps);

struct KSweepEntry {
    std::size_t k = 0;
    std::vector<BreakdownRow> breakdown; // plain vs structured at this k
    std::optional<RecallSummary> recall;
    std::uint64_t plain_checksum = 0;
    std::uint64_t structured_checksum = 0;
};

/// Plain vs structured (full mask) comparison at each k. Only the search-time
/// k varies; both index checksums are constant across the sweep.
std::vector<KSweepEntry> run_k_sweep(const std::vector<Document>& docs,
                                     const std::vector<Query>& queries,
                                     const PipelineConfig& base_config,
                                     const std::vector<std::size_t>& ks,
                                     const std::filesystem::path& grid_dir, GridDeps deps);

struct GridSpec {
    AppConfig base;
    std::filesystem::path queries;
    std::vector<std::pair<std::string, AblationMask>> masks; // label, mask
    std::vector<std::size_t> ks = {3, 5, 10};
};

/// Grid spec file: regular config keys plus `queries`, optional `masks`
/// (comma list of mask specs; default FULL plus the five leave-one-out
/// masks) and optional `ks` (comma list of integers).
GridSpec load_grid_spec(const std::filesystem::path& path);

/// Executes the whole grid: marginal ablations over spec.masks and the
/// k-sweep, emitting ablation.csv, ksweep_recall.csv (when gold ids exist),
/// per-k class score tables and grid_manifest.json under out_dir.
void run_grid(const GridSpec& spec, const std::filesystem::path& out_dir);

} // namespace srag
