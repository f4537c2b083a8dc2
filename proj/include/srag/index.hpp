#pragma once

#include "srag/embedding.hpp"
#include "srag/metadata.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace srag {

enum class IndexMode : std::uint8_t { plain = 0, structured = 1 };

std::string_view to_string(IndexMode m);

struct IndexEntry {
    std::string chunk_id;
    EmbeddingVector vector;
    std::string rendered_text;  // chunk text plus metadata block, as embedded
    PartialMetadata metadata;   // recovered from rendered_text on load

    bool operator==(const IndexEntry&) const = default;
};

struct SearchHit {
    std::string chunk_id;
    double score = 0.0;   // cosine
    std::size_t rank = 0; // 1-based, consecutive

    bool operator==(const SearchHit&) const = default;
};

/// Exact flat cosine index. Entries live in a dense row matrix; search is a
/// full matrix-vector scan, sorted score-descending with ties broken by
/// chunk_id ascending. Safe for concurrent readers once built.
class FlatIndex {
public:
    FlatIndex(int dim, IndexMode mode);

    int dim() const { return dim_; }
    IndexMode mode() const { return mode_; }
    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }

    /// Adds entries; returns the number added. Rejects duplicate chunk ids
    /// and dimension mismatches.
    std::size_t add(std::vector<IndexEntry> entries);

    /// Exact top-k by cosine similarity. k > 0; returns min(k, size) hits.
    std::vector<SearchHit> search_top_k(const EmbeddingVector& query, std::size_t k) const;

    bool contains(std::string_view chunk_id) const;
    const std::string& rendered_text(std::string_view chunk_id) const;
    const PartialMetadata& metadata(std::string_view chunk_id) const;
    const std::vector<std::string>& ids() const { return ids_; }

    /// FNV-1a 64 checksum over the serialized byte image; stable across
    /// save/load round trips.
    std::uint64_t content_checksum() const;

    void save(const std::filesystem::path& path) const;
    static FlatIndex load(const std::filesystem::path& path);

private:
    std::string serialize() const;
    std::size_t row_of(std::string_view chunk_id) const;

    int dim_;
    IndexMode mode_;
    std::vector<std::string> ids_;
    std::vector<std::string> rendered_texts_;
    std::vector<PartialMetadata> metadata_;
    Eigen::MatrixXd vectors_; // one row per entry
    Eigen::VectorXd norms_;
    std::unordered_map<std::string, std::size_t> row_by_id_;
};

} // namespace srag
