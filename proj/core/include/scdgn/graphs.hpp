#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "scdgn/dataio.hpp"

namespace scdgn {

enum class Side { left, right };

/// Neighbor slice of one node: right-node (or left-node) indices, sorted
/// ascending, with the symmetric degree norm 1/(sqrt(deg_l)*sqrt(deg_r))
/// stored per edge.
struct NeighborSlice {
    std::span<const std::uint32_t> nodes;
    std::span<const double> norms;
    std::size_t size() const { return nodes.size(); }
};

/// Degree-normalized bipartite graph in CSR form, stored in both directions.
/// Duplicate (left, right) pairs collapse to a single edge.
struct BipartiteGraph {
    std::uint32_t left_count = 0;
    std::uint32_t right_count = 0;

    std::vector<std::uint64_t> left_offsets;  // size left_count + 1
    std::vector<std::uint32_t> left_adj;      // right nodes per left node, sorted
    std::vector<double> left_norm;

    std::vector<std::uint64_t> right_offsets; // transpose
    std::vector<std::uint32_t> right_adj;
    std::vector<double> right_norm;

    std::uint64_t edge_count() const { return left_adj.size(); }
    std::uint64_t degree(Side side, std::uint32_t node) const;

    friend bool operator==(const BipartiteGraph&, const BipartiteGraph&) = default;
};

/// Builds the CSR pair from an edge list; duplicates are collapsed before
/// degrees are counted.
BipartiteGraph build_bipartite(std::uint32_t left_count, std::uint32_t right_count,
                               std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

/// Constant-time neighbor slice; out-of-range nodes raise DataError.
NeighborSlice neighbors(const BipartiteGraph& graph, std::uint32_t node, Side side);

/// Target user-item graph from target-domain training interactions only.
BipartiteGraph build_target_graph(const DatasetBundle& bundle);

/// Cross-domain user-cluster graph: left = all users (target ids first),
/// right = clusters. An edge exists iff the user interacted with any item of
/// the cluster — target users contribute training interactions only, source
/// users all of theirs. Unassigned items raise DataError.
BipartiteGraph build_cross_graph(const DatasetBundle& bundle,
                                 const std::vector<std::uint32_t>& item_to_cluster);

struct GraphPair {
    BipartiteGraph target; // users_target x items_target
    BipartiteGraph cross;  // user_count x clusters

    friend bool operator==(const GraphPair&, const GraphPair&) = default;
};

GraphPair build_graphs(const DatasetBundle& bundle,
                       const std::vector<std::uint32_t>& item_to_cluster);

void save_graphs(const GraphPair& graphs, const std::filesystem::path& path);
GraphPair load_graphs(const std::filesystem::path& path);

/// degree -> node count for one side.
std::map<std::uint64_t, std::uint64_t> degree_histogram(const BipartiteGraph& graph, Side side);

} // namespace scdgn
