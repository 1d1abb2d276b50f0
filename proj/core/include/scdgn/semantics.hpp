#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scdgn/matrix.hpp"

namespace scdgn {

/// Lowercases and splits on non-alphanumeric runs. Bytes >= 0x80 are kept as
/// word characters so multi-byte UTF-8 sequences stay intact.
std::vector<std::string> tokenize(const std::string& text);

/// Frozen token -> vector table (header line holds the dimension).
struct TokenTable {
    std::size_t dim = 0;
    std::vector<std::string> tokens;
    Matrix vectors; // tokens.size() x dim
    std::unordered_map<std::string, std::uint32_t> index;

    const double* find(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? nullptr : vectors.row(it->second).data();
    }
};

TokenTable load_token_table(const std::filesystem::path& path);
void save_token_table(const TokenTable& table, const std::filesystem::path& path);

/// Corpus statistics: smoothed idf(w) = ln((1+N)/(1+df(w))) + 1 and
/// length-normalized tf(w,d) = count(w,d)/|d|.
struct TfIdfModel {
    std::uint64_t doc_count = 0;
    std::vector<std::string> vocab;
    std::unordered_map<std::string, std::uint32_t> vocab_index;
    std::vector<double> idf;                                      // by vocab id
    std::vector<std::vector<std::pair<std::uint32_t, double>>> doc_tf; // per doc, sorted by vocab id
    std::uint64_t empty_docs = 0;

    double weight(std::uint32_t doc, const std::string& token) const;
};

/// Fits on the joint corpus of both domains. Empty documents are allowed
/// (zero tf, counted); an empty corpus raises DataError.
TfIdfModel fit_tfidf(std::span<const std::string> docs);

struct SemanticsStats {
    std::uint64_t oov_tokens = 0;  // tokens with no table entry, skipped
    std::uint64_t zero_items = 0;  // items whose vector came out all-zero
};

/// Weighted token-vector sum over the document's distinct tokens; each token
/// contributes once with its tf-idf weight in this document.
std::vector<double> item_semantic_embedding(std::uint32_t doc, const TfIdfModel& tfidf,
                                            const TokenTable& table,
                                            SemanticsStats* stats = nullptr);

/// All item vectors, row i = item i of the corpus.
Matrix compute_item_vectors(const TfIdfModel& tfidf, const TokenTable& table,
                            SemanticsStats* stats = nullptr);

struct ClusterModel {
    std::uint32_t k = 0;
    Matrix centroids;                       // k x dim
    std::vector<std::uint32_t> assignment;  // item -> cluster
    double inertia = 0.0;
    std::vector<double> inertia_trace;      // one entry per Lloyd assignment step
    bool converged = false;

    friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

/// Lloyd iterations with k-means++ seeding. Stops when assignments are
/// unchanged or after max_iter sweeps; an emptied cluster is reseeded to the
/// point currently farthest from its assigned centroid. Deterministic for a
/// fixed seed.
ClusterModel kmeans(const Matrix& points, std::uint32_t k, std::uint64_t seed,
                    std::uint32_t max_iter = 300);

/// Mean of the member item vectors (not the k-means centroid; the two agree
/// only at convergence).
std::vector<double> cluster_semantic_embedding(std::uint32_t cluster, const ClusterModel& model,
                                               const Matrix& item_vectors);

Matrix compute_cluster_vectors(const ClusterModel& model, const Matrix& item_vectors);

/// Everything the model stage needs downstream of clustering.
struct SemanticArchive {
    Matrix item_vectors;
    ClusterModel clusters;
    Matrix cluster_vectors;
    SemanticsStats stats;
};

SemanticArchive build_semantics(std::span<const std::string> docs, const TokenTable& table,
                                std::uint32_t k, std::uint64_t seed);

void save_semantics(const SemanticArchive& archive, const std::filesystem::path& path);
SemanticArchive load_semantics(const std::filesystem::path& path);

} // namespace scdgn
