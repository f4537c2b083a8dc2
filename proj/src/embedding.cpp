#include "srag/embedding.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"

#include <algorithm>
#include <cstdint>

namespace srag {
namespace {

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char ascii_lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

} // namespace

EmbeddingVector local_embed(std::string_view text, int dim) {
    if (dim < 16)
        throw InvalidArgument("local_embed: dim must be at least 16");

    EmbeddingVector v = EmbeddingVector::Zero(dim);
    std::string token;
    bool any_token = false;
    auto flush = [&] {
        if (token.empty())
            return;
        const std::uint64_t h = fnv1a64(token);
        const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dim));
        const double sign = (splitmix64(h) & 1u) ? 1.0 : -1.0;
        v[bucket] += sign;
        any_token = true;
        token.clear();
    };

    for (unsigned char c : text) {
        if (is_ascii_alnum(c))
            token.push_back(ascii_lower(c));
        else
            flush();
    }
    flush();

    if (!any_token || v.isZero(0.0)) {
        // Declared sentinel for degenerate inputs (including sign-cancelled bags).
        v.setZero();
        v[0] = 1.0;
        return v;
    }
    v.normalize();
    return v;
}

LocalHashEmbedder::LocalHashEmbedder(int dim) : dim_(dim) {
    if (dim < 16)
        throw InvalidArgument("LocalHashEmbedder: dim must be at least 16");
}

std::vector<EmbeddingVector> LocalHashEmbedder::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts)
        out.push_back(local_embed(t, dim_));
    return out;
}

std::string LocalHashEmbedder::name() const {
    return "local:hash-bow-" + std::to_string(dim_);
}

std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         const std::vector<std::string>& texts) {
    if (texts.empty())
        return {};
    for (const auto& t : texts)
        if (t.empty())
            throw InvalidArgument("embed_texts: texts must be non-empty strings");

    std::vector<EmbeddingVector> out = provider.embed(texts);
    if (out.size() != texts.size())
        throw ContentError("embed_texts: provider returned " + std::to_string(out.size()) +
                           " vectors for " + std::to_string(texts.size()) + " texts");
    const Eigen::Index dim = out.front().size();
    for (const auto& v : out) {
        if (v.size() != dim)
            throw ContentError("embed_texts: dimension mismatch across batch (" +
                               std::to_string(v.size()) + " vs " + std::to_string(dim) + ")");
        if (!v.allFinite())
            throw ContentError("embed_texts: non-finite vector component");
    }
    return out;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size())
        throw InvalidArgument("cosine_similarity: dimension mismatch");
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0)
        throw InvalidArgument("cosine_similarity: zero vector");
    const double c = a.dot(b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

} // namespace srag
