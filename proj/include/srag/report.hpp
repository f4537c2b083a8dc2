#pragma once

#include "srag/config.hpp"
#include "srag/csv.hpp"
#include "srag/pipeline.hpp"

#include <filesystem>
#include <string>

namespace srag {

/// Identity and provenance of one experiment run. In deterministic (local
/// provider) runs the id derives from the config snapshot and timestamps are
/// pinned to the epoch, so repeated runs emit byte-identical files.
struct RunContext {
    std::string run_id;
    std::string config_text;
    std::string timestamp;
    bool deterministic = true;
    std::string tagger_name;
    std::string embedder_name;
    std::string answerer_name;
    std::string judge_name;
};

RunContext make_run_context(const AppConfig& config, const Providers& providers);

/// Writes the initial manifest (status "running") before any scoring starts;
/// write_compare_outputs later replaces it with the finalized manifest
/// (status "complete"). An interrupted run leaves the running marker behind.
void write_run_started(const std::filesystem::path& out_dir, const RunContext& ctx);

/// Emits the comparison artifacts into out_dir:
///   class_scores.csv  per-class judge means and Welch p (leading All Queries row)
///   tail_risk.csv     the nine tail-risk statistics
///   class_counts.csv  query class distribution
///   scores.csv        raw per-query scores for both systems
///   recall.csv        gold-chunk recall summary (only when gold ids present)
///   results.json      all of the above, machine-readable
///   manifest.json     run id, config snapshot, index checksums, answer records
void write_compare_outputs(const std::filesystem::path& out_dir, const CompareResult& result,
                           const RunContext& ctx, std::size_t k);

/// Re-reads every emitted file with the strict readers and cross-checks row
/// counts. Throws on any inconsistency.
void validate_compare_outputs(const std::filesystem::path& out_dir, std::size_t n_queries,
                              bool with_recall);

CsvRow breakdown_csv_header();
CsvRow breakdown_csv_row(const BreakdownRow& row);

/// Cell value used for p-values that cannot be computed (n < 2).
inline constexpr std::string_view kInsufficientN = "insufficient_n";

} // namespace srag
