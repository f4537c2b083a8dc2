#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace srag {

using EmbeddingVector = Eigen::VectorXd;

/// Turns batches of texts into fixed-dimension vectors. Implementations must
/// be safe for concurrent calls.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// One vector per text, order-preserving, all sharing one dimension.
    virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

    /// Provenance string recorded in run manifests.
    virtual std::string name() const = 0;
};

/// Deterministic hashed bag-of-tokens embedding: lowercase, split on
/// non-alphanumerics, each token hashed to a bucket with a +-1 second hash,
/// counts accumulated, L2-normalized. Stable across platforms (FNV-1a 64 /
/// splitmix64 with fixed constants). A text with no tokens maps to the unit
/// basis vector e0. Requires dim >= 16.
EmbeddingVector local_embed(std::string_view text, int dim);

class LocalHashEmbedder final : public EmbeddingProvider {
public:
    explicit LocalHashEmbedder(int dim = 256);

    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
    std::string name() const override;

    int dim() const { return dim_; }

private:
    int dim_;
};

/// Embeds texts through a provider, enforcing the batch contract: inputs
/// non-empty, output order-preserving, one shared dimension (a mismatch is a
/// hard error).
std::vector<EmbeddingVector> embed_texts(EmbeddingProvider& provider,
                                         const std::vector<std::string>& texts);

/// dot(a,b) / (|a||b|), clamped to [-1, 1] against rounding. Dimensions must
/// match and neither vector may be zero.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

} // namespace srag
