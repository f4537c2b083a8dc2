#pragma once

#include "srag/corpus.hpp"
#include "srag/pipeline.hpp"

#include <filesystem>
#include <map>
#include <string>

namespace srag {

/// Full tool configuration: pipeline settings plus corpus location.
struct AppConfig {
    PipelineConfig pipeline;
    std::filesystem::path corpus;
    CorpusFormat corpus_format = CorpusFormat::jsonl;
};

/// Loads the key-value config file (`key = value`, '#' comments). Relative
/// paths are resolved against the config file's directory. Unknown keys are
/// rejected.
AppConfig load_app_config(const std::filesystem::path& path);

/// Parses `key = value` lines; rejects duplicates and malformed lines.
std::map<std::string, std::string> parse_key_value_file(const std::string& content,
                                                        const std::string& origin);

/// Applies one config key; returns false when the key is unknown. Relative
/// paths resolve against `base`.
bool apply_config_key(AppConfig& config, const std::string& key, const std::string& value,
                      const std::filesystem::path& base);

/// Parses a mask spec: "full", a comma list of
/// no_semantic_tags/no_topics/no_chunk_type/no_kg_triples/no_sentiment
/// tokens, or "bits:XXXXX" (semantic_tags, topics, chunk_type, kg_triples,
/// sentiment order).
AblationMask parse_mask_spec(const std::string& spec);

/// Directory-safe label for a mask ("FULL", "no_topics", "bits_10110").
std::string mask_label(const AblationMask& mask);

/// Canonical key-value snapshot of the effective configuration; embedded in
/// manifests and hashed into deterministic run ids.
std::string config_snapshot(const AppConfig& config);

} // namespace srag
