#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "scdgn/dataio.hpp"
#include "scdgn/graphs.hpp"
#include "scdgn/matrix.hpp"

namespace scdgn {

/// Cosine similarity with the zero-norm convention: any zero-norm argument
/// yields similarity 0.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct HyperParams {
    std::uint32_t d = 32;          // embedding dimension
    std::uint32_t d_a = 32;        // debias vector dimension (must equal d for L_rs)
    std::uint32_t p_layers = 2;    // cross-graph conv layers (P)
    std::uint32_t q_layers = 3;    // target-graph conv layers (Q)
    double lambda1 = 1.0;          // restriction losses
    double lambda2 = 1.0;          // dimension-reduction loss
    double lambda3 = 0.1;          // L2 penalty
    double learning_rate = 0.01;
    std::uint32_t batch_size = 1024;
    std::uint32_t k = 200;         // cluster count (informational after clustering)
    std::uint64_t seed = 42;
    std::uint32_t max_epochs = 200;
    std::uint32_t patience = 20;

    // ablations
    bool no_cross_graph = false;   // w/o SI: drop the user-cluster graph entirely
    bool no_dr_loss = false;       // w/o DRloss
    bool no_debias = false;        // w/o DB: plain conv on the cross graph

    // paper-gap switches
    bool dedup_layer0 = false;     // count e_u once in the final aggregation
    bool init_debias_ones = false; // start at the unbiased fixed point a_uc = 1

    bool cross_active() const { return !no_cross_graph; }
    bool debias_active() const { return cross_active() && !no_debias; }
    bool rs_active() const { return debias_active() && lambda1 > 0.0; }
    bool dr_active() const { return !no_dr_loss && lambda2 > 0.0; }
};

/// Throws ConfigError on invalid combinations (notably d_a != d while the
/// restriction losses are enabled).
void validate(const HyperParams& hp);

struct ModelSizes {
    std::uint32_t users_target = 0;
    std::uint32_t users_source = 0;
    std::uint32_t items_target = 0;
    std::uint32_t clusters = 0;
    std::uint32_t d_txt = 0;

    std::uint32_t user_count() const { return users_target + users_source; }
};

ModelSizes sizes_from(const DatasetBundle& bundle, std::uint32_t clusters, std::uint32_t d_txt);

/// All trainable arrays.
struct Parameters {
    Matrix user_emb;       // |U| x d      (e_u)
    Matrix reduce_weight;  // d x D_txt    (W)
    std::vector<double> reduce_bias; // d  (b)
    Matrix debias_user;    // |U| x d_a    (a_u)
    Matrix debias_cluster; // |C| x d_a    (a_c)

    friend bool operator==(const Parameters&, const Parameters&) = default;
};

Parameters init_parameters(const ModelSizes& sizes, const HyperParams& hp, std::mt19937_64& rng);

/// Edge re-weighting factor a_uc = (a_u . a_c) / d_a. The mean-scaled inner
/// product makes the all-ones initialization land exactly on a_uc = 1, the
/// unbiased fixed point.
double debias_factor(const Parameters& params, std::uint32_t user, std::uint32_t cluster);

/// Affine reduction Wx + b applied to one semantic vector.
std::vector<double> reduce(const Parameters& params, std::span<const double> x);

/// Row-wise reduction of the first `rows` rows of a semantic matrix.
Matrix reduce_rows(const Parameters& params, const Matrix& semantic, std::size_t rows);

/// One light-convolution pass: for every node on `into`, the degree-normalized
/// sum of its neighbors' layer-l vectors. `factors` (aligned with that side's
/// CSR edge order) re-weights each edge; pass nullptr for the plain layer.
void propagate(const BipartiteGraph& graph, Side into, const Matrix& source, Matrix& dest,
               const double* factors);

/// Per-edge debias factors aligned with the left and right CSR orders.
struct EdgeFactors {
    std::vector<double> left;
    std::vector<double> right;
};

EdgeFactors compute_edge_factors(const BipartiteGraph& cross, const Parameters& params);

struct ModelInputs {
    const Parameters& params;
    const GraphPair& graphs;
    const Matrix& item_vectors;    // |V| x D_txt, both domains
    const Matrix& cluster_vectors; // |C| x D_txt
    const HyperParams& hp;
};

/// Every layer output plus the aggregated finals. Layer 0 holds the
/// embedding-layer outputs.
struct ForwardCache {
    std::vector<Matrix> h_user;     // Q+1 of |U_t| x d
    std::vector<Matrix> h_item;     // Q+1 of |V_t| x d
    std::vector<Matrix> g_user;     // P+1 of |U| x d (empty when no_cross_graph)
    std::vector<Matrix> g_cluster;  // P+1 of |C| x d
    std::vector<Matrix> gp_user;    // plain-conv counterparts
    std::vector<Matrix> gp_cluster;

    Matrix user_final;           // e-bar_u: cross sum + target sum (target users)
    Matrix user_cross_final;     // cross-graph part only; feeds the restrictions
    Matrix item_final;           // e-bar_v
    Matrix cluster_final;        // e-bar_c
    Matrix user_biased_final;    // e-bar'_u
    Matrix cluster_biased_final; // e-bar'_c

    EdgeFactors factors;         // factors used by the debias layers
};

/// Full-graph forward pass. When `frozen` is given its factor arrays are used
/// verbatim inside the debias layers (the detach contract holds them constant
/// for differentiation; the finite-difference oracle freezes them the same way).
ForwardCache forward_full(const ModelInputs& in, const EdgeFactors* frozen = nullptr);

double predict(const ForwardCache& cache, std::uint32_t user, std::uint32_t item);
double predict_cluster(const ForwardCache& cache, std::uint32_t user, std::uint32_t cluster);
double predict_cluster_biased(const ForwardCache& cache, std::uint32_t user,
                              std::uint32_t cluster);

/// One training example: a positive (u, v, c) tuple with its sampled negative.
struct BatchTuple {
    std::uint32_t user = 0;
    std::uint32_t pos_item = 0;
    std::uint32_t neg_item = 0;
    std::uint32_t pos_cluster = 0;
    std::uint32_t neg_cluster = 0;
};

std::vector<BatchTuple> make_batch(std::span<const Interaction> positives,
                                   std::span<const std::uint32_t> negatives,
                                   const std::vector<std::uint32_t>& item_to_cluster);

/// -sum ln sigma(y_uv - y_uv-), summed over the batch (no averaging).
double bpr_loss(const ForwardCache& cache, std::span<const BatchTuple> batch);

/// Numerically stable -ln sigma(x).
double neg_log_sigmoid(double x);

/// Mean over the batch of the squared cosine-similarity drift of the item and
/// cluster pairs under the reduction layer.
double dr_loss(const ForwardCache& cache, std::span<const BatchTuple> batch,
               const Matrix& item_vectors, const Matrix& cluster_vectors,
               std::uint64_t* zero_norm_pairs = nullptr);

struct RestrictionLosses {
    double prediction = 0.0; // L_rsp
    double user = 0.0;       // L_rsu
    double cluster = 0.0;    // L_rsc
    double sum() const { return prediction + user + cluster; }
};

RestrictionLosses restriction_losses(const ForwardCache& cache, std::span<const BatchTuple> batch,
                                     const Parameters& params, const HyperParams& hp);

/// ||theta||^2 over the parameter groups that are active under the ablation flags.
double l2_penalty(const Parameters& params, const HyperParams& hp);

struct LossBreakdown {
    double bpr = 0.0;
    double rsp = 0.0;
    double rsu = 0.0;
    double rsc = 0.0;
    double dr = 0.0;
    double reg = 0.0; // ||theta||^2, unweighted
    double total = 0.0;

    double rs() const { return rsp + rsu + rsc; }
};

LossBreakdown total_loss(const ModelInputs& in, const ForwardCache& cache,
                         std::span<const BatchTuple> batch);

} // namespace scdgn
