#pragma once

// Attack evaluation: success rate, misclassification confidence, accuracy
// drop, and structural perturbation statistics.

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "gtlab/common.hpp"
#include "gtlab/graph.hpp"
#include "gtlab/linalg.hpp"

namespace gtlab {

// One classification outcome. For trigger-embedded trials the record keeps
// the target class the attack was steering toward.
struct TrialRecord {
    int graph_id = 0;
    int true_label = 0;
    int predicted = 0;
    std::vector<double> confidence;  // softmax over classes
    bool trigger_embedded = false;
    int target_label = -1;
};

// Fraction of trigger-embedded trials classified as their target class.
inline double attack_success_rate(const std::vector<TrialRecord>& records) {
    int total = 0, hits = 0;
    for (const auto& r : records) {
        if (!r.trigger_embedded) continue;
        require(r.target_label >= 0, "attack_success_rate: embedded trial lacks target");
        ++total;
        if (r.predicted == r.target_label) ++hits;
    }
    require(total > 0, "attack_success_rate: no trigger-embedded trials");
    return static_cast<double>(hits) / total;
}

// Mean confidence assigned to the target class over successful embedded
// trials only; NaN when there are no successes.
inline double avg_misclassification_confidence(const std::vector<TrialRecord>& records) {
    double s = 0.0;
    int hits = 0;
    for (const auto& r : records) {
        if (!r.trigger_embedded || r.predicted != r.target_label) continue;
        require(r.target_label < static_cast<int>(r.confidence.size()),
                "avg_misclassification_confidence: confidence vector too short");
        s += r.confidence[r.target_label];
        ++hits;
    }
    if (hits == 0) return std::numeric_limits<double>::quiet_NaN();
    return s / hits;
}

inline double clean_accuracy(const std::vector<TrialRecord>& records) {
    int total = 0, hits = 0;
    for (const auto& r : records) {
        if (r.trigger_embedded) continue;
        ++total;
        if (r.predicted == r.true_label) ++hits;
    }
    require(total > 0, "clean_accuracy: no clean trials");
    return static_cast<double>(hits) / total;
}

// Accuracy of the clean-model system minus the trojan system on clean
// inputs; negative values are legitimate.
inline double clean_accuracy_drop(const std::vector<TrialRecord>& clean_system,
                                  const std::vector<TrialRecord>& trojan_system) {
    return clean_accuracy(clean_system) - clean_accuracy(trojan_system);
}

struct GraphStats {
    double avg_degree = 0.0;
    double avg_eccentricity = 0.0;         // over the largest component
    double algebraic_connectivity = 0.0;   // lambda_2 of the largest component
    bool connected = false;
    int largest_component = 0;
};

namespace detail {

inline std::vector<int> largest_component_nodes(const Graph& g) {
    std::vector<int> comp(g.n, -1);
    int n_comp = 0;
    for (int s = 0; s < g.n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = n_comp;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v = 0; v < g.n; ++v)
                if (g.has_edge(u, v) && comp[v] < 0) {
                    comp[v] = n_comp;
                    q.push(v);
                }
        }
        ++n_comp;
    }
    std::vector<int> count(n_comp, 0);
    for (int c : comp) count[c]++;
    int best = 0;
    for (int c = 1; c < n_comp; ++c)
        if (count[c] > count[best]) best = c;
    std::vector<int> nodes;
    for (int v = 0; v < g.n; ++v)
        if (comp[v] == best) nodes.push_back(v);
    return nodes;
}

inline std::vector<int> bfs_dist_within(const Graph& g, int src,
                                        const std::vector<int>& allowed_mask) {
    std::vector<int> dist(g.n, -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v = 0; v < g.n; ++v)
            if (g.has_edge(u, v) && allowed_mask[v] && dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push(v);
            }
    }
    return dist;
}

}  // namespace detail

// Laplacian spectrum of the whole graph (no component restriction); the
// second-smallest eigenvalue is 0 exactly when the graph is disconnected.
inline std::vector<double> laplacian_eigenvalues(const Graph& g) {
    std::vector<double> L(static_cast<std::size_t>(g.n) * g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
        L[static_cast<std::size_t>(i) * g.n + i] = g.degree(i);
        for (int j = 0; j < g.n; ++j)
            if (g.has_edge(i, j)) L[static_cast<std::size_t>(i) * g.n + j] = -1.0;
    }
    return jacobi_eigenvalues(std::move(L), g.n);
}

// Average degree over the whole graph; eccentricity and algebraic
// connectivity over the largest connected component.
inline GraphStats graph_stats(const Graph& g) {
    require(g.n >= 2, "graph_stats: need at least two nodes");
    GraphStats st;
    st.avg_degree = 2.0 * g.edge_count() / g.n;

    std::vector<int> nodes = detail::largest_component_nodes(g);
    st.largest_component = static_cast<int>(nodes.size());
    st.connected = st.largest_component == g.n;

    std::vector<int> mask(g.n, 0);
    for (int v : nodes) mask[v] = 1;
    double ecc_sum = 0.0;
    for (int v : nodes) {
        auto dist = detail::bfs_dist_within(g, v, mask);
        int ecc = 0;
        for (int u : nodes) ecc = std::max(ecc, dist[u]);
        ecc_sum += ecc;
    }
    st.avg_eccentricity = ecc_sum / nodes.size();

    if (nodes.size() == 1) {
        st.algebraic_connectivity = 0.0;
        return st;
    }
    int m = static_cast<int>(nodes.size());
    std::vector<double> L(static_cast<std::size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a) {
        int deg = 0;
        for (int b = 0; b < m; ++b)
            if (g.has_edge(nodes[a], nodes[b])) {
                L[static_cast<std::size_t>(a) * m + b] = -1.0;
                ++deg;
            }
        L[static_cast<std::size_t>(a) * m + a] = deg;
    }
    auto eig = jacobi_eigenvalues(std::move(L), m);
    st.algebraic_connectivity = eig[1];
    return st;
}

// Structural deltas between clean graphs and their trigger-embedded
// counterparts: ADD is the mean absolute average-degree difference; AEC and
// ACC are mean relative differences (percent of the clean value) of average
// eccentricity and algebraic connectivity. Pairs whose clean value is zero
// contribute their absolute difference instead of a ratio.
struct StatDeltas {
    double add = 0.0;
    double aec_pct = 0.0;
    double acc_pct = 0.0;
};

inline StatDeltas paired_stat_deltas(const std::vector<GraphStats>& clean,
                                     const std::vector<GraphStats>& trojan) {
    require(clean.size() == trojan.size(), "paired_stat_deltas: length mismatch");
    require(!clean.empty(), "paired_stat_deltas: empty input");
    StatDeltas out;
    auto rel = [](double c, double t) {
        double d = std::fabs(t - c);
        if (std::fabs(c) < 1e-12) return d * 100.0;
        return d / std::fabs(c) * 100.0;
    };
    for (std::size_t i = 0; i < clean.size(); ++i) {
        out.add += std::fabs(trojan[i].avg_degree - clean[i].avg_degree);
        out.aec_pct += rel(clean[i].avg_eccentricity, trojan[i].avg_eccentricity);
        out.acc_pct += rel(clean[i].algebraic_connectivity, trojan[i].algebraic_connectivity);
    }
    double n = static_cast<double>(clean.size());
    out.add /= n;
    out.aec_pct /= n;
    out.acc_pct /= n;
    return out;
}

}  // namespace gtlab
