#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mbdiff/rng.hpp"
#include "mbdiff/types.hpp"

namespace mbdiff {

// Immutable undirected simple graph in CSR form. Neighbor lists are sorted,
// contain no duplicates and no self-loops, and are symmetric. Safe to share
// read-only across threads.
class Graph {
public:
    // Edges must be free of self-loops and duplicates (in either direction).
    static Graph from_edges(NodeId node_count,
                            const std::vector<std::pair<NodeId, NodeId>>& edges);

    NodeId node_count() const { return static_cast<NodeId>(offsets_.size() - 1); }
    std::size_t edge_count() const { return neighbors_.size() / 2; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
    }
    std::uint32_t degree(NodeId v) const {
        return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
    }
    // 1/degree, or 0 for isolated nodes.
    double inv_degree(NodeId v) const { return inv_degree_[v]; }
    const double* inv_degree_data() const { return inv_degree_.data(); }

    bool has_edge(NodeId u, NodeId v) const;

    // Full-scan structural check: symmetry, no self-loops, sorted unique
    // neighbor lists. Throws std::logic_error on violation.
    void validate() const;

private:
    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
    std::vector<double> inv_degree_;
};

// Social influence weight exerted on `target` by any one of its neighbors.
// Throws std::invalid_argument for isolated nodes.
double influence_weight(const Graph& g, NodeId target);

// Reads a SNAP-style edge list: '#' lines are comments, data lines are two
// whitespace-separated non-negative integer ids. Ids are remapped to a dense
// 0..n-1 range in first-appearance order, reciprocal duplicates collapse to
// one undirected edge, self-loops are dropped. Nodes left isolated after
// cleanup are dropped unless keep_isolated is set.
// Throws std::runtime_error with a line number on malformed input, and on
// input with no data lines.
Graph load_edge_list(std::istream& in, bool keep_isolated = false);
Graph load_edge_list_file(const std::string& path, bool keep_isolated = false);

// Writes the graph in the same format (each undirected edge once, u < v).
void save_edge_list(std::ostream& out, const Graph& g);
void save_edge_list_file(const std::string& path, const Graph& g);

// Preferential attachment: starts from a single edge, every new node links
// to one existing node with probability proportional to current degree.
// Result is a connected tree with n-1 edges. Requires n >= 2.
Graph generate_preferential_attachment(NodeId n, Rng& rng);

// Small world: ring lattice where i links to i+1 and i+2 (mod n, so 2n edges
// and degree 4), then each edge's far endpoint is rewired with probability
// p_rewire to a uniform random node, rejecting self-loops and duplicates.
// Edge count stays 2n. Requires n >= 5 and 0 <= p_rewire <= 1.
Graph generate_small_world(NodeId n, double p_rewire, Rng& rng);

// Spatially clustered: nodes placed i.i.d. uniform in the unit square, then
// the round(n*avg_degree/2) closest unconnected pairs become edges (ties by
// lower node id pair). Requires avg_degree <= n-1.
Graph generate_spatially_clustered(NodeId n, double avg_degree, Rng& rng);

}  // namespace mbdiff
