#include "srag/corpus.hpp"

#include "srag/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace srag {
namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

std::string require_string_field(const json& obj, const char* field, std::size_t line_no) {
    if (!obj.contains(field))
        throw IoError("corpus line " + std::to_string(line_no) + ": missing field '" + field +
                      "'");
    const json& v = obj.at(field);
    if (!v.is_string())
        throw IoError("corpus line " + std::to_string(line_no) + ": field '" + field +
                      "' must be a string");
    return v.get<std::string>();
}

std::vector<Document> load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open corpus file: " + path.string());

    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
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
            throw IoError("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
        Document doc;
        doc.id = require_string_field(obj, "id", line_no);
        doc.source = require_string_field(obj, "source", line_no);
        doc.text = require_string_field(obj, "text", line_no);
        if (doc.id.empty())
            throw IoError("corpus line " + std::to_string(line_no) + ": empty id");
        if (doc.text.empty())
            throw IoError("corpus line " + std::to_string(line_no) + ": empty text");
        if (!seen.insert(doc.id).second)
            throw IoError("corpus line " + std::to_string(line_no) + ": duplicate id '" +
                          doc.id + "'");
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<Document> load_plain_dir(const std::filesystem::path& path) {
    if (!std::filesystem::is_directory(path))
        throw IoError("not a directory: " + path.string());

    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
        if (!entry.is_regular_file())
            continue;
        Document doc;
        doc.id = entry.path().lexically_relative(path).generic_string();
        doc.source = entry.path().string();
        doc.text = read_file(entry.path());
        if (doc.text.empty())
            throw IoError("empty document: " + doc.source);
        if (!seen.insert(doc.id).second)
            throw IoError("duplicate document id '" + doc.id + "'");
        docs.push_back(std::move(doc));
    }
    std::sort(docs.begin(), docs.end(),
              [](const Document& a, const Document& b) { return a.id < b.id; });
    return docs;
}

bool is_utf8_continuation(unsigned char c) {
    return (c & 0xC0) == 0x80;
}

// Byte offset of every code point, plus a sentinel for the total length.
std::vector<std::size_t> code_point_offsets(const std::string& text) {
    std::vector<std::size_t> offsets;
    offsets.reserve(text.size() + 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_utf8_continuation(static_cast<unsigned char>(text[i])))
            offsets.push_back(i);
    }
    offsets.push_back(text.size());
    return offsets;
}

bool is_whitespace_at(const std::string& text, std::size_t byte_offset) {
    const char c = text[byte_offset];
    return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

} // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
    if (!std::filesystem::exists(path))
        throw IoError("corpus path does not exist: " + path.string());
    switch (format) {
    case CorpusFormat::jsonl: return load_jsonl(path);
    case CorpusFormat::plain_dir: return load_plain_dir(path);
    }
    throw InvalidArgument("unknown corpus format");
}

std::vector<Chunk> chunk_document(const Document& doc, std::size_t max_chars,
                                  std::size_t overlap) {
    if (max_chars == 0)
        throw InvalidArgument("chunk_document: max_chars must be positive");
    if (overlap >= max_chars)
        throw InvalidArgument("chunk_document: overlap must be smaller than max_chars");

    const std::vector<std::size_t> offsets = code_point_offsets(doc.text);
    const std::size_t n = offsets.size() - 1; // code point count
    const std::size_t stride = max_chars - overlap;
    const std::size_t snap_range = max_chars / 5;

    std::vector<Chunk> chunks;
    std::size_t start = 0;
    while (start < n) {
        const std::size_t hard_end = std::min(start + max_chars, n);
        std::size_t end = hard_end;
        bool snapped = false;
        if (hard_end < n && snap_range > 0) {
            const std::size_t lo = hard_end > snap_range ? hard_end - snap_range : 0;
            for (std::size_t cp = hard_end; cp > lo && cp > start;) {
                --cp;
                if (is_whitespace_at(doc.text, offsets[cp])) {
                    // Snap only while the next window still advances.
                    if (cp + 1 > start + overlap) {
                        end = cp + 1;
                        snapped = true;
                    }
                    break;
                }
            }
        }

        Chunk chunk;
        chunk.doc_id = doc.id;
        chunk.ordinal = chunks.size();
        chunk.id = doc.id + "#" + std::to_string(chunk.ordinal);
        chunk.char_span = {start, end};
        chunk.text = doc.text.substr(offsets[start], offsets[end] - offsets[start]);
        chunks.push_back(std::move(chunk));

        start = snapped ? end - overlap : start + stride;
    }
    return chunks;
}

} // namespace srag
