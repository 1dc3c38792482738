#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "gtlab/common.hpp"
#include "gtlab/tensor.hpp"

namespace gtlab {

// Undirected graph with dense adjacency and per-node feature rows. Inductive
// graphs carry a single label; transductive graphs carry one label per node.
struct Graph {
    int id = 0;
    int n = 0;
    int feat_dim = 0;
    std::vector<std::uint8_t> adj;   // n*n, symmetric, zero diagonal
    std::vector<double> features;    // n*feat_dim, row-major
    int label = -1;                  // -1 when node-labelled
    std::vector<int> node_labels;    // empty when graph-labelled

    static Graph make(int n, int feat_dim) {
        Graph g;
        g.n = n;
        g.feat_dim = feat_dim;
        g.adj.assign(static_cast<std::size_t>(n) * n, 0);
        g.features.assign(static_cast<std::size_t>(n) * feat_dim, 0.0);
        return g;
    }

    bool has_edge(int i, int j) const {
        return adj[static_cast<std::size_t>(i) * n + j] != 0;
    }

    void set_edge(int i, int j, bool on = true) {
        require(i >= 0 && i < n && j >= 0 && j < n, "Graph::set_edge: node out of range");
        require(i != j, "Graph::set_edge: self-loops are not allowed");
        adj[static_cast<std::size_t>(i) * n + j] = on ? 1 : 0;
        adj[static_cast<std::size_t>(j) * n + i] = on ? 1 : 0;
    }

    int degree(int i) const {
        int d = 0;
        for (int j = 0; j < n; ++j) d += adj[static_cast<std::size_t>(i) * n + j];
        return d;
    }

    int edge_count() const {
        int e = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) e += adj[static_cast<std::size_t>(i) * n + j];
        return e;
    }

    double feature(int i, int k) const {
        return features[static_cast<std::size_t>(i) * feat_dim + k];
    }

    void set_feature(int i, int k, double v) {
        features[static_cast<std::size_t>(i) * feat_dim + k] = v;
    }

    void validate() const {
        require(n > 0, "Graph: empty graph");
        require(adj.size() == static_cast<std::size_t>(n) * n, "Graph: adjacency size mismatch");
        require(features.size() == static_cast<std::size_t>(n) * feat_dim,
                "Graph: feature size mismatch");
        for (int i = 0; i < n; ++i) {
            if (adj[static_cast<std::size_t>(i) * n + i] != 0)
                throw DataError("Graph: self-loop at node " + std::to_string(i));
            for (int j = 0; j < n; ++j) {
                auto a = adj[static_cast<std::size_t>(i) * n + j];
                if (a != 0 && a != 1) throw DataError("Graph: adjacency entries must be 0/1");
                if (a != adj[static_cast<std::size_t>(j) * n + i])
                    throw DataError("Graph: adjacency not symmetric");
            }
        }
        for (double f : features)
            if (!std::isfinite(f)) throw DataError("Graph: non-finite feature value");
        bool graph_labelled = label >= 0;
        bool node_labelled = !node_labels.empty();
        if (graph_labelled == node_labelled)
            throw DataError("Graph: need exactly one of graph label / node labels");
        if (node_labelled && static_cast<int>(node_labels.size()) != n)
            throw DataError("Graph: node label count mismatch");
    }
};

// Ordered node positions inside a host graph; order matters because trigger
// substitution is positional.
struct SubgraphRef {
    int graph_id = 0;
    std::vector<int> nodes;
};

struct Dataset {
    std::vector<Graph> graphs;
    int num_classes = 0;
    int feat_dim = 0;
    bool transductive = false;
    std::map<std::string, std::vector<int>> splits;  // name -> indices into graphs or nodes

    const Graph& by_index(int i) const { return graphs.at(static_cast<std::size_t>(i)); }
};

// Replacement payload for substitute(): a hard adjacency block plus feature
// rows for the site nodes.
struct SubgraphPatch {
    int n = 0;
    int feat_dim = 0;
    std::vector<std::uint8_t> adj;  // n*n, symmetric, zero diagonal
    std::vector<double> features;   // n*feat_dim

    void validate() const {
        require(n > 0, "SubgraphPatch: empty patch");
        require(adj.size() == static_cast<std::size_t>(n) * n, "SubgraphPatch: adjacency size");
        require(features.size() == static_cast<std::size_t>(n) * feat_dim,
                "SubgraphPatch: feature size");
        for (int i = 0; i < n; ++i) {
            require(adj[static_cast<std::size_t>(i) * n + i] == 0, "SubgraphPatch: self-loop");
            for (int j = 0; j < n; ++j)
                require(adj[static_cast<std::size_t>(i) * n + j] ==
                            adj[static_cast<std::size_t>(j) * n + i],
                        "SubgraphPatch: adjacency not symmetric");
        }
    }
};

inline void check_site(const Graph& g, const std::vector<int>& nodes) {
    require(!nodes.empty(), "site: empty node list");
    std::vector<int> seen = nodes;
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) {
        require(seen[i] >= 0 && seen[i] < g.n, "site: node out of range");
        require(i == 0 || seen[i] != seen[i - 1], "site: duplicate node");
    }
}

// All nodes within K hops of the seed set (seeds included), ascending order.
inline std::vector<int> k_hop_neighborhood(const Graph& g, const std::vector<int>& seeds,
                                           int k) {
    require(k >= 0, "k_hop_neighborhood: negative K");
    check_site(g, seeds);
    std::vector<int> dist(g.n, -1);
    std::queue<int> q;
    for (int s : seeds) {
        dist[s] = 0;
        q.push(s);
    }
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        if (dist[u] == k) continue;
        for (int v = 0; v < g.n; ++v) {
            if (g.has_edge(u, v) && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
        }
    }
    std::vector<int> out;
    for (int v = 0; v < g.n; ++v)
        if (dist[v] >= 0) out.push_back(v);
    return out;
}

// Positional substitution m(G; g_t): the induced adjacency among site nodes
// and their feature rows are replaced by the patch; every edge with an
// endpoint outside the site is preserved and no boundary edge is added.
inline Graph substitute(const Graph& g, const std::vector<int>& site,
                        const SubgraphPatch& patch) {
    check_site(g, site);
    patch.validate();
    require(static_cast<int>(site.size()) == patch.n,
            "substitute: site size does not match patch");
    require(patch.feat_dim == g.feat_dim, "substitute: feature dimension mismatch");
    Graph out = g;
    for (std::size_t a = 0; a < site.size(); ++a) {
        for (std::size_t b = 0; b < site.size(); ++b) {
            if (a == b) continue;
            out.adj[static_cast<std::size_t>(site[a]) * g.n + site[b]] =
                patch.adj[a * patch.n + b];
        }
        for (int kf = 0; kf < g.feat_dim; ++kf)
            out.set_feature(site[a], kf, patch.features[a * patch.feat_dim + kf]);
    }
    return out;
}

inline Tensor adjacency_tensor(const Graph& g) {
    std::vector<double> v(g.adj.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.adj[i];
    return Tensor::from_values(g.n, g.n, std::move(v));
}

inline Tensor features_tensor(const Graph& g) {
    return Tensor::from_values(g.n, g.feat_dim, g.features);
}

}  // namespace gtlab
