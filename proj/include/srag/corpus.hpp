#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace srag {

struct Document {
    std::string id;     // unique within a corpus, non-empty
    std::string source; // path or URI
    std::string text;   // UTF-8, non-empty

    bool operator==(const Document&) const = default;
};

/// Character (code point) offsets into Document.text, end exclusive.
struct CharSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const CharSpan&) const = default;
};

struct Chunk {
    std::string id;     // "<doc_id>#<ordinal>"
    std::string doc_id;
    std::size_t ordinal = 0;
    std::string text;
    CharSpan char_span;

    bool operator==(const Chunk&) const = default;
};

enum class CorpusFormat { jsonl, plain_dir };

/// Loads a corpus. jsonl: one object per line with `id`, `source`, `text`.
/// plain_dir: every regular file under the directory becomes one Document
/// (id = relative path), ordered by id. Malformed lines are reported with
/// their line number; duplicate ids are rejected.
std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusFormat format);

struct ChunkingParams {
    std::size_t max_chars = 1600;
    std::size_t overlap = 200;
};

/// Splits a document into overlapping chunks of at most `max_chars`
/// characters (code points, never bytes). Adjacent chunks share exactly
/// `overlap` characters except possibly the last. When a window boundary
/// falls mid-text, it snaps backward to the nearest whitespace found within
/// the final 20% of the window, provided forward progress is preserved.
std::vector<Chunk> chunk_document(const Document& doc, std::size_t max_chars,
                                  std::size_t overlap);

inline std::vector<Chunk> chunk_document(const Document& doc, const ChunkingParams& params) {
    return chunk_document(doc, params.max_chars, params.overlap);
}

} // namespace srag
