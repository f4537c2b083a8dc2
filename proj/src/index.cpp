#include "srag/index.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace srag {
namespace {

constexpr char kMagic[8] = {'S', 'R', 'A', 'G', 'I', 'D', 'X', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_bytes(std::string& out, std::string_view bytes) {
    put_u64(out, bytes.size());
    out.append(bytes);
}

struct Reader {
    std::string_view data;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > data.size())
            throw IoError("index file truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string bytes() {
        const std::uint64_t n = u64();
        need(n);
        std::string s(data.substr(pos, n));
        pos += n;
        return s;
    }
};

} // namespace

std::string_view to_string(IndexMode m) {
    return m == IndexMode::plain ? "plain" : "structured";
}

FlatIndex::FlatIndex(int dim, IndexMode mode) : dim_(dim), mode_(mode) {
    if (dim <= 0)
        throw InvalidArgument("FlatIndex: dim must be positive");
}

std::size_t FlatIndex::add(std::vector<IndexEntry> entries) {
    for (const auto& e : entries) {
        if (e.vector.size() != dim_)
            throw InvalidArgument("FlatIndex: entry '" + e.chunk_id + "' has dim " +
                                  std::to_string(e.vector.size()) + ", index dim is " +
                                  std::to_string(dim_));
        if (!e.vector.allFinite() || e.vector.isZero(0.0))
            throw InvalidArgument("FlatIndex: entry '" + e.chunk_id +
                                  "' has a zero or non-finite vector");
        if (row_by_id_.contains(e.chunk_id))
            throw InvalidArgument("FlatIndex: duplicate chunk id '" + e.chunk_id + "'");
    }
    // Also reject duplicates within the incoming batch.
    for (std::size_t i = 0; i < entries.size(); ++i)
        for (std::size_t j = i + 1; j < entries.size(); ++j)
            if (entries[i].chunk_id == entries[j].chunk_id)
                throw InvalidArgument("FlatIndex: duplicate chunk id '" + entries[i].chunk_id +
                                      "'");

    const std::size_t old_rows = ids_.size();
    vectors_.conservativeResize(static_cast<Eigen::Index>(old_rows + entries.size()), dim_);
    norms_.conservativeResize(static_cast<Eigen::Index>(old_rows + entries.size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        IndexEntry& e = entries[i];
        const auto row = static_cast<Eigen::Index>(old_rows + i);
        vectors_.row(row) = e.vector.transpose();
        norms_[row] = e.vector.norm();
        row_by_id_.emplace(e.chunk_id, old_rows + i);
        ids_.push_back(std::move(e.chunk_id));
        rendered_texts_.push_back(std::move(e.rendered_text));
        metadata_.push_back(std::move(e.metadata));
    }
    return entries.size();
}

std::vector<SearchHit> FlatIndex::search_top_k(const EmbeddingVector& query,
                                               std::size_t k) const {
    if (empty())
        throw InvalidArgument("search_top_k: index is empty");
    if (k == 0)
        throw InvalidArgument("search_top_k: k must be positive");
    if (query.size() != dim_)
        throw InvalidArgument("search_top_k: query dim " + std::to_string(query.size()) +
                              " does not match index dim " + std::to_string(dim_));
    const double qnorm = query.norm();
    if (qnorm == 0.0)
        throw InvalidArgument("search_top_k: zero query vector");

    Eigen::VectorXd scores = (vectors_ * query).cwiseQuotient(norms_ * qnorm);
    scores = scores.cwiseMin(1.0).cwiseMax(-1.0);

    std::vector<std::size_t> order(ids_.size());
    std::iota(order.begin(), order.end(), 0);
    const auto better = [&](std::size_t a, std::size_t b) {
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(b);
        if (scores[ia] != scores[ib])
            return scores[ia] > scores[ib];
        return ids_[a] < ids_[b];
    };
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                      order.end(), better);

    std::vector<SearchHit> hits;
    hits.reserve(take);
    for (std::size_t r = 0; r < take; ++r)
        hits.push_back({ids_[order[r]], scores[static_cast<Eigen::Index>(order[r])], r + 1});
    return hits;
}

bool FlatIndex::contains(std::string_view chunk_id) const {
    return row_by_id_.contains(std::string(chunk_id));
}

std::size_t FlatIndex::row_of(std::string_view chunk_id) const {
    const auto it = row_by_id_.find(std::string(chunk_id));
    if (it == row_by_id_.end())
        throw InvalidArgument("FlatIndex: unknown chunk id '" + std::string(chunk_id) + "'");
    return it->second;
}

const std::string& FlatIndex::rendered_text(std::string_view chunk_id) const {
    return rendered_texts_[row_of(chunk_id)];
}

const PartialMetadata& FlatIndex::metadata(std::string_view chunk_id) const {
    return metadata_[row_of(chunk_id)];
}

std::string FlatIndex::serialize() const {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    put_u32(out, kFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(dim_));
    out.push_back(static_cast<char>(mode_));
    put_u64(out, ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        put_bytes(out, ids_[i]);
        for (int d = 0; d < dim_; ++d)
            put_f64(out, vectors_(static_cast<Eigen::Index>(i), d));
        put_bytes(out, rendered_texts_[i]);
    }
    return out;
}

std::uint64_t FlatIndex::content_checksum() const {
    return fnv1a64(serialize());
}

void FlatIndex::save(const std::filesystem::path& path) const {
    std::string payload = serialize();
    put_u64(payload, fnv1a64(payload));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open index file for writing: " + path.string());
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out)
        throw IoError("failed writing index file: " + path.string());
}

FlatIndex FlatIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open index file: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (data.size() < sizeof(kMagic) + 8)
        throw IoError("index file truncated");
    if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0)
        throw IoError("not an index file: bad magic");

    const std::string_view body(data.data(), data.size() - 8);
    Reader tail{data, data.size() - 8};
    const std::uint64_t stored = tail.u64();
    if (fnv1a64(body) != stored)
        throw IoError("index file checksum mismatch");

    Reader r{body, sizeof(kMagic)};
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw IoError("unsupported index format version " + std::to_string(version));
    const std::uint32_t dim = r.u32();
    r.need(1);
    const auto mode_byte = static_cast<std::uint8_t>(body[r.pos++]);
    if (mode_byte > 1)
        throw IoError("index file has invalid mode byte");
    const std::uint64_t count = r.u64();

    FlatIndex index(static_cast<int>(dim), static_cast<IndexMode>(mode_byte));
    std::vector<IndexEntry> entries;
    entries.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        IndexEntry e;
        e.chunk_id = r.bytes();
        e.vector = EmbeddingVector(dim);
        for (std::uint32_t d = 0; d < dim; ++d)
            e.vector[d] = r.f64();
        e.rendered_text = r.bytes();
        e.metadata = find_metadata_block(e.rendered_text).metadata;
        entries.push_back(std::move(e));
    }
    if (r.pos != body.size())
        throw IoError("index file has trailing bytes");
    index.add(std::move(entries));
    return index;
}

} // namespace srag
