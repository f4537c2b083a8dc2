#include "srag/index.hpp"

#include "srag/errors.hpp"
#include "srag/util.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace srag;

namespace {

IndexEntry make_entry(const std::string& id, std::vector<double> values,
                      const std::string& text = "") {
    IndexEntry e;
    e.chunk_id = id;
    e.vector = Eigen::Map<EmbeddingVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    e.rendered_text = text.empty() ? "body of " + id : text;
    return e;
}

EmbeddingVector random_vector(SplitMix64& rng, int dim) {
    EmbeddingVector v(dim);
    for (int i = 0; i < dim; ++i)
        v[i] = rng.uniform01() * 2.0 - 1.0;
    if (v.norm() == 0.0)
        v[0] = 1.0;
    return v;
}

std::filesystem::path temp_file(const std::string& name) {
    const auto path = std::filesystem::temp_directory_path() / ("srag_index_" + name + ".bin");
    std::filesystem::remove(path);
    return path;
}

} // namespace

TEST_CASE("add: zero entries is a no-op returning zero") {
    FlatIndex index(4, IndexMode::plain);
    CHECK(index.add({}) == 0);
    CHECK(index.empty());
}

TEST_CASE("add: k larger than the index returns everything") {
    FlatIndex index(2, IndexMode::plain);
    index.add({make_entry("a", {1.0, 0.0}), make_entry("b", {0.5, 0.5}),
               make_entry("c", {0.0, 1.0})});
    EmbeddingVector q(2);
    q << 1.0, 0.2;
    const std::vector<SearchHit> hits = index.search_top_k(q, 10);
    CHECK(hits.size() == 3);
    for (std::size_t i = 0; i < hits.size(); ++i)
        CHECK(hits[i].rank == i + 1);
}

TEST_CASE("add: duplicate chunk ids are rejected") {
    FlatIndex index(2, IndexMode::plain);
    index.add({make_entry("a", {1.0, 0.0})});
    CHECK_THROWS_AS(index.add({make_entry("a", {0.0, 1.0})}), InvalidArgument);
    CHECK_THROWS_AS(index.add({make_entry("x", {1.0, 0.0}), make_entry("x", {0.0, 1.0})}),
                    InvalidArgument);
    CHECK(index.size() == 1);
}

TEST_CASE("add: dimension mismatches are rejected") {
    FlatIndex index(3, IndexMode::plain);
    CHECK_THROWS_AS(index.add({make_entry("a", {1.0, 0.0})}), InvalidArgument);
}

TEST_CASE("search: singleton index returns its entry at rank 1") {
    FlatIndex index(2, IndexMode::plain);
    index.add({make_entry("only", {0.3, 0.7})});
    EmbeddingVector q(2);
    q << 1.0, 1.0;
    const std::vector<SearchHit> hits = index.search_top_k(q, 1);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].chunk_id == "only");
    CHECK(hits[0].rank == 1);
}

TEST_CASE("search: ties break by chunk id ascending") {
    FlatIndex index(2, IndexMode::plain);
    index.add({make_entry("b", {1.0, 0.0}), make_entry("a", {1.0, 0.0})});
    EmbeddingVector q(2);
    q << 1.0, 0.0;
    const std::vector<SearchHit> hits = index.search_top_k(q, 2);
    REQUIRE(hits.size() == 2);
    CHECK(hits[0].chunk_id == "a");
    CHECK(hits[1].chunk_id == "b");
    CHECK(hits[0].score == hits[1].score);
}

TEST_CASE("search: empty index, bad k and dim mismatches are rejected") {
    FlatIndex index(2, IndexMode::plain);
    EmbeddingVector q(2);
    q << 1.0, 0.0;
    CHECK_THROWS_AS(index.search_top_k(q, 3), InvalidArgument);
    index.add({make_entry("a", {1.0, 0.0})});
    CHECK_THROWS_AS(index.search_top_k(q, 0), InvalidArgument);
    EmbeddingVector wrong(3);
    wrong << 1.0, 0.0, 0.0;
    CHECK_THROWS_AS(index.search_top_k(wrong, 1), InvalidArgument);
    EmbeddingVector zero = EmbeddingVector::Zero(2);
    CHECK_THROWS_AS(index.search_top_k(zero, 1), InvalidArgument);
}

TEST_CASE("search equals the brute-force oracle on random indices") {
    SplitMix64 rng(8080);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 8 + static_cast<int>(rng.below(24));
        const std::size_t n = 1 + rng.below(120);
        FlatIndex index(dim, IndexMode::plain);
        std::vector<std::string> ids;
        std::vector<EmbeddingVector> vectors;
        std::vector<IndexEntry> entries;
        for (std::size_t i = 0; i < n; ++i) {
            IndexEntry e;
            e.chunk_id = "c" + std::to_string(1000 + i);
            // Plant exact duplicates to force tie-breaking.
            e.vector = (i % 7 == 3 && i > 0) ? vectors.back() : random_vector(rng, dim);
            e.rendered_text = "t" + std::to_string(i);
            ids.push_back(e.chunk_id);
            vectors.push_back(e.vector);
            entries.push_back(std::move(e));
        }
        index.add(std::move(entries));
        for (std::size_t k : {std::size_t{1}, std::size_t{5}, n, n + 7}) {
            const EmbeddingVector q = random_vector(rng, dim);
            const auto expected = oracle::brute_force_top_k(ids, vectors, q, k);
            const auto hits = index.search_top_k(q, k);
            REQUIRE(hits.size() == expected.size());
            for (std::size_t i = 0; i < hits.size(); ++i) {
                CHECK(hits[i].chunk_id == expected[i].id);
                CHECK(hits[i].score == doctest::Approx(expected[i].score).epsilon(1e-12));
                CHECK(hits[i].rank == i + 1);
            }
        }
    }
}

TEST_CASE("persistence: save then load preserves search results exactly") {
    SplitMix64 rng(99);
    const int dim = 12;
    FlatIndex index(dim, IndexMode::structured);
    std::vector<IndexEntry> entries;
    for (int i = 0; i < 40; ++i) {
        IndexEntry e;
        e.chunk_id = "chunk" + std::to_string(i);
        e.vector = random_vector(rng, dim);
        e.rendered_text = "Body " + std::to_string(i) +
                          "\n\n--- METADATA ---\n\nType: narrative\n\nTopics: T" +
                          std::to_string(i) + "\n";
        entries.push_back(std::move(e));
    }
    index.add(std::move(entries));

    const auto path = temp_file("roundtrip");
    index.save(path);
    const FlatIndex loaded = FlatIndex::load(path);
    CHECK(loaded.size() == index.size());
    CHECK(loaded.dim() == index.dim());
    CHECK(loaded.mode() == index.mode());
    CHECK(loaded.content_checksum() == index.content_checksum());

    // Metadata is recovered from the rendered text on load.
    CHECK(loaded.metadata("chunk3").chunk_type == "narrative");
    REQUIRE(loaded.metadata("chunk3").topics.has_value());
    CHECK(loaded.metadata("chunk3").topics->front() == "T3");

    for (int trial = 0; trial < 8; ++trial) {
        const EmbeddingVector q = random_vector(rng, dim);
        const auto before = index.search_top_k(q, 10);
        const auto after = loaded.search_top_k(q, 10);
        REQUIRE(before.size() == after.size());
        for (std::size_t i = 0; i < before.size(); ++i) {
            CHECK(before[i].chunk_id == after[i].chunk_id);
            CHECK(std::fabs(before[i].score - after[i].score) <= 1e-12);
        }
    }
}

TEST_CASE("persistence: corrupting one payload byte is caught by the checksum") {
    SplitMix64 rng(7);
    FlatIndex index(8, IndexMode::plain);
    index.add({make_entry("a", {1, 0, 0, 0, 0, 0, 0, 0}),
               make_entry("b", {0, 1, 0, 0, 0, 0, 0, 0})});
    const auto path = temp_file("corrupt");
    index.save(path);

    std::string bytes = read_text_file(path);
    const std::size_t flip = bytes.size() / 2;
    bytes[flip] = static_cast<char>(bytes[flip] ^ 0x40);
    write_text_file(path, bytes);

    try {
        FlatIndex::load(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("checksum") != std::string::npos);
    }
}

TEST_CASE("persistence: unknown version and truncated files are rejected") {
    FlatIndex index(4, IndexMode::plain);
    index.add({make_entry("a", {1, 0, 0, 0})});
    const auto path = temp_file("version");
    index.save(path);

    std::string bytes = read_text_file(path);
    // Forge the version field (offset 8, little-endian u32) and refresh the
    // trailing checksum so only the version check can fire.
    bytes[8] = 9;
    const std::string body = bytes.substr(0, bytes.size() - 8);
    std::uint64_t checksum = fnv1a64(body);
    for (int i = 0; i < 8; ++i)
        bytes[bytes.size() - 8 + static_cast<std::size_t>(i)] =
            static_cast<char>((checksum >> (8 * i)) & 0xFF);
    write_text_file(path, bytes);
    try {
        FlatIndex::load(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }

    // Truncation.
    const auto trunc_path = temp_file("trunc");
    index.save(trunc_path);
    std::string full = read_text_file(trunc_path);
    write_text_file(trunc_path, full.substr(0, full.size() / 2));
    CHECK_THROWS_AS(FlatIndex::load(trunc_path), IoError);

    // Wrong magic.
    const auto magic_path = temp_file("magic");
    write_text_file(magic_path, "definitely not an index file, but long enough to read");
    try {
        FlatIndex::load(magic_path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("magic") != std::string::npos);
    }
}
