#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "gtlab/metrics.hpp"
#include "gtlab/rng.hpp"
#include "helpers.hpp"

using namespace gtlab;

namespace {

// Eigenvalue oracle independent of the Jacobi solver: bisection on the count
// of eigenvalues below x, where the count comes from the inertia of A - xI
// under symmetric elimination (Sylvester's law).
int count_eigs_below(std::vector<double> a, int n, double x) {
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + i] -= x;
    int neg = 0;
    for (int k = 0; k < n; ++k) {
        double piv = a[static_cast<std::size_t>(k) * n + k];
        if (std::fabs(piv) < 1e-13) piv = piv < 0 ? -1e-13 : 1e-13;
        if (piv < 0) ++neg;
        for (int i = k + 1; i < n; ++i) {
            double f = a[static_cast<std::size_t>(i) * n + k] / piv;
            if (f == 0.0) continue;
            for (int j = k; j < n; ++j)
                a[static_cast<std::size_t>(i) * n + j] -=
                    f * a[static_cast<std::size_t>(k) * n + j];
        }
    }
    return neg;
}

double kth_eigenvalue_oracle(const std::vector<double>& a, int n, int k) {
    double r = 0.0;
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += std::fabs(a[static_cast<std::size_t>(i) * n + j]);
        r = std::max(r, s);
    }
    double lo = -r - 1.0, hi = r + 1.0;
    while (hi - lo > 1e-11) {
        double mid = 0.5 * (lo + hi);
        if (count_eigs_below(a, n, mid) <= k)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> laplacian_of(const Graph& g) {
    std::vector<double> L(static_cast<std::size_t>(g.n) * g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
        L[static_cast<std::size_t>(i) * g.n + i] = g.degree(i);
        for (int j = 0; j < g.n; ++j)
            if (g.has_edge(i, j)) L[static_cast<std::size_t>(i) * g.n + j] = -1.0;
    }
    return L;
}

struct UnionFind {
    std::vector<int> p;
    explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
    void unite(int a, int b) { p[find(a)] = find(b); }
};

bool connected_oracle(const Graph& g) {
    UnionFind uf(g.n);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
            if (g.has_edge(i, j)) uf.unite(i, j);
    for (int v = 1; v < g.n; ++v)
        if (uf.find(v) != uf.find(0)) return false;
    return true;
}

double avg_ecc_floyd_warshall(const Graph& g) {
    const int INF = 1 << 20;
    std::vector<std::vector<int>> d(g.n, std::vector<int>(g.n, INF));
    for (int i = 0; i < g.n; ++i) d[i][i] = 0;
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j)
            if (g.has_edge(i, j)) d[i][j] = 1;
    for (int m = 0; m < g.n; ++m)
        for (int i = 0; i < g.n; ++i)
            for (int j = 0; j < g.n; ++j)
                d[i][j] = std::min(d[i][j], d[i][m] + d[m][j]);
    double s = 0.0;
    for (int i = 0; i < g.n; ++i) {
        int e = 0;
        for (int j = 0; j < g.n; ++j)
            if (d[i][j] < INF) e = std::max(e, d[i][j]);
        s += e;
    }
    return s / g.n;
}

Graph er_graph(Rng& rng, int n, double p) {
    Graph g = Graph::make(n, 1);
    g.label = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(p)) g.set_edge(i, j);
    return g;
}

TrialRecord rec(int pred, int truth, bool embedded, int target, double conf_target) {
    TrialRecord r;
    r.predicted = pred;
    r.true_label = truth;
    r.trigger_embedded = embedded;
    r.target_label = target;
    r.confidence = {1.0 - conf_target, conf_target};
    return r;
}

}  // namespace

TEST_CASE("asr counts embedded hits only", "[metrics]") {
    std::vector<TrialRecord> rs;
    for (int i = 0; i < 7; ++i) rs.push_back(rec(1, 0, true, 1, 0.9));
    for (int i = 0; i < 3; ++i) rs.push_back(rec(0, 0, true, 1, 0.2));
    rs.push_back(rec(1, 1, false, -1, 0.8));  // clean record must not count
    REQUIRE(attack_success_rate(rs) == Catch::Approx(0.7));
    std::vector<TrialRecord> none = {rec(1, 1, false, -1, 0.5)};
    REQUIRE_THROWS_AS(attack_success_rate(none), UsageError);
}

TEST_CASE("amc averages target confidence over successes, NaN when none", "[metrics]") {
    std::vector<TrialRecord> rs = {rec(1, 0, true, 1, 0.8), rec(1, 0, true, 1, 0.6),
                                   rec(0, 0, true, 1, 0.99)};
    REQUIRE(avg_misclassification_confidence(rs) == Catch::Approx(0.7));
    std::vector<TrialRecord> miss = {rec(0, 0, true, 1, 0.99)};
    REQUIRE(std::isnan(avg_misclassification_confidence(miss)));
}

TEST_CASE("cad is clean minus trojan accuracy and may be negative", "[metrics]") {
    std::vector<TrialRecord> clean_sys = {rec(0, 0, false, -1, 0.1), rec(1, 1, false, -1, 0.9),
                                          rec(0, 1, false, -1, 0.4), rec(0, 0, false, -1, 0.2)};
    std::vector<TrialRecord> troj_sys = {rec(0, 0, false, -1, 0.1), rec(0, 1, false, -1, 0.3),
                                         rec(0, 1, false, -1, 0.4), rec(0, 0, false, -1, 0.2)};
    REQUIRE(clean_accuracy_drop(clean_sys, troj_sys) == Catch::Approx(0.25));
    REQUIRE(clean_accuracy_drop(troj_sys, clean_sys) == Catch::Approx(-0.25));
}

TEST_CASE("path graph P3 statistics", "[metrics]") {
    Graph g = Graph::make(3, 1);
    g.label = 0;
    g.set_edge(0, 1);
    g.set_edge(1, 2);
    GraphStats st = graph_stats(g);
    REQUIRE(st.avg_degree == Catch::Approx(4.0 / 3.0));
    REQUIRE(st.avg_eccentricity == Catch::Approx(5.0 / 3.0));
    REQUIRE(st.algebraic_connectivity == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(st.connected);
}

TEST_CASE("complete graph K4 has algebraic connectivity 4", "[metrics]") {
    Graph g = Graph::make(4, 1);
    g.label = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) g.set_edge(i, j);
    GraphStats st = graph_stats(g);
    REQUIRE(st.algebraic_connectivity == Catch::Approx(4.0).margin(1e-9));
    REQUIRE(st.avg_eccentricity == Catch::Approx(1.0));
}

TEST_CASE("disconnected graph: stats restrict to the largest component", "[metrics]") {
    Graph g = Graph::make(4, 1);
    g.label = 0;
    g.set_edge(0, 1);
    g.set_edge(1, 2);
    g.set_edge(0, 2);
    GraphStats st = graph_stats(g);
    REQUIRE_FALSE(st.connected);
    REQUIRE(st.largest_component == 3);
    REQUIRE(st.avg_eccentricity == Catch::Approx(1.0));
    REQUIRE(st.algebraic_connectivity == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("graph_stats rejects graphs with fewer than two nodes", "[metrics]") {
    Graph g = Graph::make(1, 1);
    g.label = 0;
    REQUIRE_THROWS_AS(graph_stats(g), UsageError);
}

TEST_CASE("whole-graph lambda2 is zero exactly when disconnected", "[metrics]") {
    Rng rng(2024);
    int disconnected_seen = 0, connected_seen = 0;
    for (int trial = 0; trial < 60; ++trial) {
        Graph g = er_graph(rng, 4 + static_cast<int>(rng.randint(9)), rng.uniform(0.05, 0.6));
        auto eig = laplacian_eigenvalues(g);
        bool conn = connected_oracle(g);
        if (conn) {
            ++connected_seen;
            REQUIRE(eig[1] > 1e-8);
        } else {
            ++disconnected_seen;
            REQUIRE(std::fabs(eig[1]) < 1e-8);
        }
    }
    REQUIRE(disconnected_seen > 0);
    REQUIRE(connected_seen > 0);
}

TEST_CASE("graph_stats matches Floyd-Warshall and inertia-bisection oracles",
          "[metrics][slow]") {
    Rng rng(909);
    int checked = 0;
    for (int trial = 0; trial < 80; ++trial) {
        int n = 4 + static_cast<int>(rng.randint(17));  // up to 20 nodes
        Graph g = er_graph(rng, n, rng.uniform(0.15, 0.7));
        if (!connected_oracle(g)) continue;
        ++checked;
        GraphStats st = graph_stats(g);
        REQUIRE(st.avg_eccentricity == Catch::Approx(avg_ecc_floyd_warshall(g)).margin(1e-8));
        double l2 = kth_eigenvalue_oracle(laplacian_of(g), g.n, 1);
        REQUIRE(st.algebraic_connectivity == Catch::Approx(l2).margin(1e-8));
        double degs = 0.0;
        for (int i = 0; i < g.n; ++i) degs += g.degree(i);
        REQUIRE(st.avg_degree == Catch::Approx(degs / g.n).margin(1e-12));
    }
    REQUIRE(checked >= 30);
}

TEST_CASE("paired deltas: identical stats give zeros, degree case gives 0.2",
          "[metrics]") {
    GraphStats a;
    a.avg_degree = 2.0;
    a.avg_eccentricity = 2.0;
    a.algebraic_connectivity = 0.5;
    GraphStats b = a;
    StatDeltas zero = paired_stat_deltas({a}, {b});
    REQUIRE(zero.add == 0.0);
    REQUIRE(zero.aec_pct == 0.0);
    REQUIRE(zero.acc_pct == 0.0);

    b.avg_degree = 2.2;
    b.avg_eccentricity = 1.0;
    b.algebraic_connectivity = 0.75;
    StatDeltas d = paired_stat_deltas({a}, {b});
    REQUIRE(d.add == Catch::Approx(0.2));
    REQUIRE(d.aec_pct == Catch::Approx(50.0));
    REQUIRE(d.acc_pct == Catch::Approx(50.0));
}

TEST_CASE("paired deltas validate input lengths", "[metrics]") {
    GraphStats a;
    REQUIRE_THROWS_AS(paired_stat_deltas({a}, {}), UsageError);
    REQUIRE_THROWS_AS(paired_stat_deltas({}, {}), UsageError);
}
