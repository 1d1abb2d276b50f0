#include "scdgn/graphs.hpp"

#include <algorithm>
#include <cmath>

#include "scdgn/serialize.hpp"

namespace scdgn {

std::uint64_t BipartiteGraph::degree(Side side, std::uint32_t node) const {
    if (side == Side::left) return left_offsets[node + 1] - left_offsets[node];
    return right_offsets[node + 1] - right_offsets[node];
}

BipartiteGraph build_bipartite(std::uint32_t left_count, std::uint32_t right_count,
                               std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
    for (const auto& [l, r] : edges) {
        if (l >= left_count || r >= right_count)
            throw DataError("edge (" + std::to_string(l) + "," + std::to_string(r) +
                            ") outside graph bounds");
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    BipartiteGraph g;
    g.left_count = left_count;
    g.right_count = right_count;

    std::vector<std::uint64_t> left_deg(left_count, 0), right_deg(right_count, 0);
    for (const auto& [l, r] : edges) {
        ++left_deg[l];
        ++right_deg[r];
    }

    g.left_offsets.assign(left_count + 1, 0);
    for (std::uint32_t l = 0; l < left_count; ++l)
        g.left_offsets[l + 1] = g.left_offsets[l] + left_deg[l];
    g.right_offsets.assign(right_count + 1, 0);
    for (std::uint32_t r = 0; r < right_count; ++r)
        g.right_offsets[r + 1] = g.right_offsets[r] + right_deg[r];

    g.left_adj.resize(edges.size());
    g.left_norm.resize(edges.size());
    g.right_adj.resize(edges.size());
    g.right_norm.resize(edges.size());

    std::vector<std::uint64_t> lpos(g.left_offsets.begin(), g.left_offsets.end() - 1);
    std::vector<std::uint64_t> rpos(g.right_offsets.begin(), g.right_offsets.end() - 1);
    for (const auto& [l, r] : edges) {
        const double norm = 1.0 / (std::sqrt(static_cast<double>(left_deg[l])) *
                                   std::sqrt(static_cast<double>(right_deg[r])));
        g.left_adj[lpos[l]] = r;
        g.left_norm[lpos[l]] = norm;
        ++lpos[l];
        g.right_adj[rpos[r]] = l;
        g.right_norm[rpos[r]] = norm;
        ++rpos[r];
    }
    // edges were sorted by (l, r), so left slices are sorted; right slices
    // come out sorted as well because insertion scans l in ascending order.
    return g;
}

NeighborSlice neighbors(const BipartiteGraph& graph, std::uint32_t node, Side side) {
    const auto count = side == Side::left ? graph.left_count : graph.right_count;
    if (node >= count)
        throw DataError("node " + std::to_string(node) + " out of range (count " +
                        std::to_string(count) + ")");
    const auto& offsets = side == Side::left ? graph.left_offsets : graph.right_offsets;
    const auto& adj = side == Side::left ? graph.left_adj : graph.right_adj;
    const auto& norm = side == Side::left ? graph.left_norm : graph.right_norm;
    const auto begin = offsets[node];
    const auto end = offsets[node + 1];
    return {std::span(adj).subspan(begin, end - begin),
            std::span(norm).subspan(begin, end - begin)};
}

BipartiteGraph build_target_graph(const DatasetBundle& bundle) {
    if (bundle.target_train.empty()) throw DataError("no target training interactions");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(bundle.target_train.size());
    for (const auto& it : bundle.target_train) edges.emplace_back(it.user, it.item);
    return build_bipartite(bundle.users_target, bundle.items_target, std::move(edges));
}

BipartiteGraph build_cross_graph(const DatasetBundle& bundle,
                                 const std::vector<std::uint32_t>& item_to_cluster) {
    if (item_to_cluster.size() != bundle.item_count())
        throw DataError("cluster assignment does not cover all items");
    std::uint32_t clusters = 0;
    for (auto c : item_to_cluster) {
        if (c == kNoCluster) throw DataError("interaction references an unassigned item");
        clusters = std::max(clusters, c + 1);
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
    edges.reserve(bundle.target_train.size() + bundle.source_all.size());
    for (const auto& it : bundle.target_train)
        edges.emplace_back(it.user, item_to_cluster[it.item]);
    for (const auto& it : bundle.source_all)
        edges.emplace_back(it.user, item_to_cluster[it.item]);
    return build_bipartite(bundle.user_count(), clusters, std::move(edges));
}

GraphPair build_graphs(const DatasetBundle& bundle,
                       const std::vector<std::uint32_t>& item_to_cluster) {
    GraphPair pair;
    pair.target = build_target_graph(bundle);
    pair.cross = build_cross_graph(bundle, item_to_cluster);
    return pair;
}

namespace {

constexpr char kGraphMagic[8] = {'S', 'C', 'D', 'G', 'N', 'G', 'R', 'F'};
constexpr std::uint32_t kGraphVersion = 1;

void write_graph(BinaryWriter& w, const BipartiteGraph& g) {
    w.u32(g.left_count);
    w.u32(g.right_count);
    w.vec(g.left_offsets);
    w.vec(g.left_adj);
    w.vec(g.left_norm);
    w.vec(g.right_offsets);
    w.vec(g.right_adj);
    w.vec(g.right_norm);
}

BipartiteGraph read_graph(BinaryReader& r) {
    BipartiteGraph g;
    g.left_count = r.u32();
    g.right_count = r.u32();
    g.left_offsets = r.vec<std::uint64_t>();
    g.left_adj = r.vec<std::uint32_t>();
    g.left_norm = r.vec<double>();
    g.right_offsets = r.vec<std::uint64_t>();
    g.right_adj = r.vec<std::uint32_t>();
    g.right_norm = r.vec<double>();
    return g;
}

} // namespace

void save_graphs(const GraphPair& graphs, const std::filesystem::path& path) {
    BinaryWriter w(path);
    w.magic(kGraphMagic, kGraphVersion);
    write_graph(w, graphs.target);
    write_graph(w, graphs.cross);
    w.close();
}

GraphPair load_graphs(const std::filesystem::path& path) {
    BinaryReader r(path);
    const auto version = r.magic(kGraphMagic);
    if (version != kGraphVersion)
        throw DataError(path.string() + ": unsupported graph version " + std::to_string(version));
    GraphPair pair;
    pair.target = read_graph(r);
    pair.cross = read_graph(r);
    return pair;
}

std::map<std::uint64_t, std::uint64_t> degree_histogram(const BipartiteGraph& graph, Side side) {
    std::map<std::uint64_t, std::uint64_t> hist;
    const auto count = side == Side::left ? graph.left_count : graph.right_count;
    for (std::uint32_t n = 0; n < count; ++n) ++hist[graph.degree(side, n)];
    return hist;
}

} // namespace scdgn

