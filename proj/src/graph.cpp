#include "mbdiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace mbdiff {

namespace {

// Packs an undirected edge into one key, smaller endpoint first.
std::uint64_t edge_key(NodeId u, NodeId v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

}  // namespace

Graph Graph::from_edges(NodeId node_count,
                        const std::vector<std::pair<NodeId, NodeId>>& edges) {
    Graph g;
    g.offsets_.assign(static_cast<std::size_t>(node_count) + 1, 0);
    for (const auto& [u, v] : edges) {
        if (u >= node_count || v >= node_count)
            throw std::invalid_argument("edge endpoint out of range");
        if (u == v) throw std::invalid_argument("self-loop in edge set");
        ++g.offsets_[u + 1];
        ++g.offsets_[v + 1];
    }
    for (std::size_t i = 1; i < g.offsets_.size(); ++i)
        g.offsets_[i] += g.offsets_[i - 1];

    g.neighbors_.resize(edges.size() * 2);
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (const auto& [u, v] : edges) {
        g.neighbors_[cursor[u]++] = v;
        g.neighbors_[cursor[v]++] = u;
    }
    for (NodeId v = 0; v < node_count; ++v) {
        auto begin = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]);
        auto end = g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]);
        std::sort(begin, end);
        if (std::adjacent_find(begin, end) != end)
            throw std::invalid_argument("duplicate edge in edge set");
    }

    g.inv_degree_.resize(node_count);
    for (NodeId v = 0; v < node_count; ++v) {
        const auto d = g.degree(v);
        g.inv_degree_[v] = d ? 1.0 / d : 0.0;
    }
    return g;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    const auto nbrs = neighbors(u);
    return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

void Graph::validate() const {
    const NodeId n = node_count();
    for (NodeId v = 0; v < n; ++v) {
        const auto nbrs = neighbors(v);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            if (nbrs[i] == v) throw std::logic_error("self-loop");
            if (nbrs[i] >= n) throw std::logic_error("neighbor out of range");
            if (i > 0 && nbrs[i - 1] >= nbrs[i])
                throw std::logic_error("neighbor list not sorted/unique");
            if (!has_edge(nbrs[i], v)) throw std::logic_error("asymmetric edge");
        }
    }
}

double influence_weight(const Graph& g, NodeId target) {
    const auto d = g.degree(target);
    if (d == 0)
        throw std::invalid_argument("influence weight undefined for isolated node " +
                                    std::to_string(target));
    return 1.0 / d;
}

Graph load_edge_list(std::istream& in, bool keep_isolated) {
    std::unordered_map<std::uint64_t, NodeId> remap;   // raw id -> dense id, first appearance order
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::pair<NodeId, NodeId>> edges;

    auto dense = [&](std::uint64_t raw) {
        return remap.emplace(raw, static_cast<NodeId>(remap.size())).first->second;
    };

    std::string line;
    std::size_t line_no = 0;
    std::size_t data_lines = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;      // blank
        if (line[start] == '#') continue;              // comment
        std::istringstream fields(line);
        std::uint64_t a = 0, b = 0;
        std::string extra;
        if (!(fields >> a >> b) || (fields >> extra))
            throw std::runtime_error("edge list line " + std::to_string(line_no) +
                                     ": expected two integer node ids, got \"" + line + "\"");
        ++data_lines;
        const NodeId u = dense(a);
        const NodeId v = dense(b);
        if (u == v) continue;                          // self-loop
        if (seen.insert(edge_key(u, v)).second) edges.emplace_back(u, v);
    }
    if (data_lines == 0) throw std::runtime_error("edge list contains no edges");

    NodeId n = static_cast<NodeId>(remap.size());
    if (!keep_isolated) {
        // A node can end up isolated only if all its lines were self-loops.
        std::vector<std::uint32_t> deg(n, 0);
        for (const auto& [u, v] : edges) {
            ++deg[u];
            ++deg[v];
        }
        std::vector<NodeId> compact(n, 0);
        NodeId next = 0;
        for (NodeId v = 0; v < n; ++v)
            if (deg[v] > 0) compact[v] = next++;
        if (next != n) {
            for (auto& [u, v] : edges) {
                u = compact[u];
                v = compact[v];
            }
            n = next;
        }
    }
    return Graph::from_edges(n, edges);
}

Graph load_edge_list_file(const std::string& path, bool keep_isolated) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    return load_edge_list(in, keep_isolated);
}

void save_edge_list(std::ostream& out, const Graph& g) {
    out << "# nodes " << g.node_count() << " edges " << g.edge_count() << "\n";
    for (NodeId u = 0; u < g.node_count(); ++u)
        for (NodeId v : g.neighbors(u))
            if (u < v) out << u << '\t' << v << '\n';
}

void save_edge_list_file(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_edge_list(out, g);
    if (!out.flush()) throw std::runtime_error("write failed: " + path);
}

Graph generate_preferential_attachment(NodeId n, Rng& rng) {
    if (n < 2) throw std::invalid_argument("preferential attachment needs n >= 2");
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(n - 1);
    // Attachment is proportional to current degree: sampling a uniform edge
    // endpoint weights each node by its degree. Seeded with the edge 0-1 so
    // the first attachment is well-defined.
    std::vector<NodeId> bag = {0, 1};
    edges.emplace_back(0, 1);
    for (NodeId t = 2; t < n; ++t) {
        const NodeId target = bag[rng.below(bag.size())];
        edges.emplace_back(target, t);
        bag.push_back(t);       // new node's edge end
        bag.push_back(target);  // target's edge end
    }
    return Graph::from_edges(n, edges);
}

Graph generate_small_world(NodeId n, double p_rewire, Rng& rng) {
    if (n < 5) throw std::invalid_argument("small world needs n >= 5");
    if (p_rewire < 0.0 || p_rewire > 1.0)
        throw std::invalid_argument("rewire probability outside [0, 1]");
    // Ring lattice: i links to i+1 and i+2, giving 2n edges, degree 4.
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(2 * static_cast<std::size_t>(n));
    std::unordered_set<std::uint64_t> present;
    present.reserve(4 * static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i)
        for (NodeId step : {NodeId{1}, NodeId{2}}) {
            const NodeId j = (i + step) % n;
            edges.emplace_back(i, j);
            present.insert(edge_key(i, j));
        }
    // Rewire each edge's far endpoint with probability p_rewire, keeping the
    // near endpoint. Self-loops and existing edges are rejected; after a few
    // failed draws the edge stays as it was.
    for (auto& [u, v] : edges) {
        if (rng.uniform01() >= p_rewire) continue;
        for (int attempt = 0; attempt < 32; ++attempt) {
            const NodeId w = static_cast<NodeId>(rng.below(n));
            if (w == u || present.count(edge_key(u, w))) continue;
            present.erase(edge_key(u, v));
            present.insert(edge_key(u, w));
            v = w;
            break;
        }
    }
    return Graph::from_edges(n, edges);
}

Graph generate_spatially_clustered(NodeId n, double avg_degree, Rng& rng) {
    if (n < 2) throw std::invalid_argument("spatially clustered needs n >= 2");
    if (avg_degree <= 0.0 || avg_degree > static_cast<double>(n - 1))
        throw std::invalid_argument("average degree must be in (0, n-1]");
    std::vector<double> x(n), y(n);
    for (NodeId v = 0; v < n; ++v) {
        x[v] = rng.uniform01();
        y[v] = rng.uniform01();
    }
    struct Pair {
        double dist2;
        NodeId u, v;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) {
            const double dx = x[u] - x[v];
            const double dy = y[u] - y[v];
            pairs.push_back({dx * dx + dy * dy, u, v});
        }
    const std::size_t m = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * avg_degree / 2.0));
    if (m > pairs.size())
        throw std::invalid_argument("requested more edges than node pairs");
    std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(m),
                      pairs.end(), [](const Pair& a, const Pair& b) {
                          if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
                          if (a.u != b.u) return a.u < b.u;
                          return a.v < b.v;
                      });
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < m; ++i) edges.emplace_back(pairs[i].u, pairs[i].v);
    return Graph::from_edges(n, edges);
}

}  // namespace mbdiff
