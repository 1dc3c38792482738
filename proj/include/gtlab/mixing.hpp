#pragma once

// Trigger placement: find the ordered node tuple in a host graph whose
// induced adjacency is closest (fewest edge edits) to a trigger's adjacency.

#include <climits>
#include <vector>

#include "gtlab/common.hpp"
#include "gtlab/graph.hpp"

namespace gtlab {

// Pairwise edge mismatches between the trigger adjacency and the host
// subgraph induced by the ordered site.
inline int edit_distance(const Graph& g, const std::vector<int>& site,
                         const std::vector<std::uint8_t>& trig_adj, int n_t) {
    require(static_cast<int>(site.size()) == n_t, "edit_distance: site size mismatch");
    require(trig_adj.size() == static_cast<std::size_t>(n_t) * n_t,
            "edit_distance: trigger adjacency size mismatch");
    check_site(g, site);
    int cost = 0;
    for (int a = 0; a < n_t; ++a)
        for (int b = a + 1; b < n_t; ++b) {
            bool host = g.has_edge(site[a], site[b]);
            bool trig = trig_adj[static_cast<std::size_t>(a) * n_t + b] != 0;
            if (host != trig) ++cost;
        }
    return cost;
}

struct SiteSearchResult {
    std::vector<int> nodes;
    int cost = INT_MAX;
    long explored = 0;  // completed assignments visited
};

namespace detail {

struct SiteSearch {
    const Graph& g;
    const std::vector<std::uint8_t>& trig;
    int n_t;
    bool prune;
    std::vector<int> order;      // host nodes, descending degree
    std::vector<bool> used;
    std::vector<int> current;
    SiteSearchResult best;

    SiteSearch(const Graph& g_, const std::vector<std::uint8_t>& t_, int n_t_, bool prune_)
        : g(g_), trig(t_), n_t(n_t_), prune(prune_), used(g_.n, false) {
        order.resize(g.n);
        for (int i = 0; i < g.n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return g.degree(a) > g.degree(b); });
    }

    // Mismatches the candidate adds against already-assigned positions.
    int added_cost(int depth, int u) const {
        int c = 0;
        for (int a = 0; a < depth; ++a) {
            bool host = g.has_edge(current[a], u);
            bool t = trig[static_cast<std::size_t>(a) * n_t + depth] != 0;
            if (host != t) ++c;
        }
        return c;
    }

    void dfs(int depth, int cost_so_far) {
        if (depth == n_t) {
            ++best.explored;
            if (cost_so_far < best.cost ||
                (cost_so_far == best.cost && current < best.nodes)) {
                best.cost = cost_so_far;
                best.nodes = current;
            }
            return;
        }
        for (int u : order) {
            if (used[u]) continue;
            int c = cost_so_far + added_cost(depth, u);
            // Partial cost only grows, so anything already above the
            // incumbent cannot win; equal cost continues so the
            // lexicographically smallest optimum is still reachable.
            if (prune && !best.nodes.empty() && c > best.cost) continue;
            used[u] = true;
            current.push_back(u);
            dfs(depth + 1, c);
            current.pop_back();
            used[u] = false;
        }
    }
};

}  // namespace detail

// Ordered backtracking over injective trigger-to-host assignments with
// incumbent pruning. Ties on cost resolve to the lexicographically smallest
// site, so results are deterministic.
inline SiteSearchResult find_best_site(const Graph& g,
                                       const std::vector<std::uint8_t>& trig_adj, int n_t,
                                       bool prune = true) {
    require(n_t > 0, "find_best_site: empty trigger");
    require(g.n >= n_t, "find_best_site: trigger larger than host graph");
    require(trig_adj.size() == static_cast<std::size_t>(n_t) * n_t,
            "find_best_site: trigger adjacency size mismatch");
    detail::SiteSearch s(g, trig_adj, n_t, prune);
    s.current.reserve(n_t);
    s.dfs(0, 0);
    return s.best;
}

// Exhaustive enumeration of every ordered node tuple; the oracle route.
// Guarded to small hosts because the tuple count grows factorially.
inline SiteSearchResult brute_force_site(const Graph& g,
                                         const std::vector<std::uint8_t>& trig_adj,
                                         int n_t) {
    require(g.n <= 12, "brute_force_site: host too large for exhaustive search");
    require(n_t > 0 && g.n >= n_t, "brute_force_site: bad trigger size");
    SiteSearchResult best;
    std::vector<int> site(n_t);
    std::vector<bool> used(g.n, false);
    auto rec = [&](auto&& self, int depth) -> void {
        if (depth == n_t) {
            ++best.explored;
            int c = edit_distance(g, site, trig_adj, n_t);
            if (c < best.cost || (c == best.cost && site < best.nodes)) {
                best.cost = c;
                best.nodes = site;
            }
            return;
        }
        for (int u = 0; u < g.n; ++u) {
            if (used[u]) continue;
            used[u] = true;
            site[depth] = u;
            self(self, depth + 1);
            used[u] = false;
        }
    };
    rec(rec, 0);
    return best;
}

}  // namespace gtlab
